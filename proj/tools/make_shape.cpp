// Writes reference solids as OBJ or PLY (chosen by extension).

#include <CLI11.hpp>

#include <iostream>

#include "graspgen/geometry.hpp"
#include "graspgen/shapes.hpp"

using namespace graspgen;

int main(int argc, char** argv) {
  CLI::App app{"Reference mesh writer"};
  std::string shape, out;
  double radius = 0.03, sx = 0.05, sy = 0.05, sz = 0.05, height = 0.1;
  double length = 0.1, thickness = 0.01, depth = 0.04;
  int subdivisions = 3;
  app.add_option("shape", shape, "sphere | box | cylinder | bracket")
      ->required()
      ->check(CLI::IsMember({"sphere", "box", "cylinder", "bracket"}));
  app.add_option("out", out, "Output .obj or .ply")->required();
  app.add_option("--radius", radius);
  app.add_option("--subdivisions", subdivisions);
  app.add_option("--sx", sx);
  app.add_option("--sy", sy);
  app.add_option("--sz", sz);
  app.add_option("--height", height);
  app.add_option("--length", length);
  app.add_option("--thickness", thickness);
  app.add_option("--depth", depth);
  CLI11_PARSE(app, argc, argv);

  try {
    TriangleMesh mesh;
    if (shape == "sphere")
      mesh = shapes::icosphere(radius, subdivisions);
    else if (shape == "box")
      mesh = shapes::box(sx, sy, sz);
    else if (shape == "cylinder")
      mesh = shapes::cylinder(radius, height);
    else
      mesh = shapes::l_bracket(length, height, thickness, depth);
    if (out.size() >= 4 && out.substr(out.size() - 4) == ".ply")
      save_ply(mesh, out);
    else
      save_obj(mesh, out);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
