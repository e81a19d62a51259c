// Writes the synthetic fixture (embeddings, rosters, anchors, patents and a
// config file) into a directory.

#include <iostream>

#include "CLI11.hpp"
#include "etlinks/error.hpp"
#include "etlinks/fixture.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic etlinks fixture."};
  etlinks::FixtureOptions options;
  std::string dir = "fixture";
  app.add_option("dir", dir, "output directory");
  app.add_option("--seed", options.seed, "generator seed");
  app.add_option("--dimension", options.dimension, "embedding dimension");
  app.add_option("--technologies", options.technologies, "technology count");
  app.add_option("--companies", options.companies, "company count");
  app.add_option("--groups", options.groups, "planted groups (at most 4)");
  app.add_option("--anchors", options.anchors, "anchor pairs");
  app.add_option("--spread", options.spread, "within-group scatter");
  CLI11_PARSE(app, argc, argv);
  try {
    const auto info = etlinks::write_synthetic_fixture(dir, options);
    std::cout << "correlated " << info.correlated_tech_id << ", noise " << info.noise_tech_id << '\n';
  } catch (const etlinks::InputError& e) {
    std::cerr << "etlinks-fixture: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "etlinks-fixture: internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
