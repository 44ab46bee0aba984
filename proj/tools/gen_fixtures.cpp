// Regenerates the bundled fixture documents under <root>/data.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "rass/fixtures.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path root = argc > 1 ? argv[1] : ".";
  for (const auto& f : rass::fixtures::bundled_files()) {
    const auto dir = root / "data" / f.subdir;
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / f.name, std::ios::binary);
    out << f.content;
    if (!out) {
      std::cerr << "cannot write " << (dir / f.name) << "\n";
      return 1;
    }
    std::cout << (dir / f.name).string() << "\n";
  }
  return 0;
}
