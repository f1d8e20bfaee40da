// Writes the bundled synthetic dataset: clouds plus ground truth for all
// three tracks.

#include <filesystem>
#include <iostream>

#include "sharp/io_formats.hpp"
#include "sharp/synthetic.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  using namespace sharp;
  const fs::path root = argc > 1 ? argv[1] : "fixtures";
  for (const char* d : {"clouds", "track1/gt", "track2/gt", "track3/gt"}) fs::create_directories(root / d);

  const std::pair<const char*, synthetic::Fixture> fixtures[] = {
      {"cube", synthetic::cube()},
      {"disk", synthetic::capped_tube()},
      {"scene", synthetic::primitive_scene()},
      {"sphere", synthetic::sphere()},
  };
  for (const auto& [name, f] : fixtures) {
    const std::string stem(name);
    io::save_point_cloud(root / "clouds" / (stem + ".xyz"), f.cloud);
    if (!f.edges.empty()) io::save_edges(root / "track1/gt" / (stem + ".json"), f.edges, io::EdgeRole::ground_truth);
    io::save_labels(root / "track2/gt" / (stem + ".csv"), f.faces);
    io::save_labels(root / "track3/gt" / (stem + ".csv"), f.steps);
    std::cout << stem << "  " << f.cloud.size() << " points, " << f.edges.size() << " edges\n";
  }
  return 0;
}
