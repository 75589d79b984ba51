// Regenerates the bundled planted-effect fixture.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "planted_fixture.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write the planted-effect fixture"};
  std::string dir = "fixtures/planted";
  persona::fixture::PlantedParams p;
  app.add_option("dir", dir, "Output directory");
  app.add_option("--seed", p.seed, "Generator seed");
  app.add_option("--fraction", p.planted_fraction, "Share of planted-genre texts used as high passages");
  app.add_option("--dim", p.dim, "Embedding dim written to the config");
  CLI11_PARSE(app, argc, argv);
  try {
    persona::fixture::write_planted_fixture(dir, p);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
