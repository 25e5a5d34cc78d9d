// Apache License, Version 2.0, refer to LICENSE.txt

#include "bvmem/presets.hpp"

namespace bvmem {

MeanParams example_mean_params() {
  MeanParams p;
  p.omega = Vector(3);
  p.omega << 0.35, 0.59, 0.43;
  p.B = Matrix(3, 3);
  p.B << 0.36, 0.07, 0.18,
         0.10, 0.24, 0.14,
         0.01, 0.10, 0.41;
  p.A = Matrix(3, 3);
  p.A << 0.21, 0.14, 0.04,
         0.13, 0.28, 0.09,
         0.07, 0.08, 0.30;
  return p;
}

InnovationSpec example_innovation() {
  InnovationSpec innov;
  innov.weights = {0.7, 0.3};
  MixtureComponent c1;
  c1.location = Vector(3);
  c1.location << -0.200, -0.175, -0.150;
  c1.scale = Matrix(3, 3);
  c1.scale << 0.40, 0.30, 0.20,
              0.30, 0.35, 0.25,
              0.20, 0.25, 0.30;
  MixtureComponent c2;
  c2.location = Vector(3);
  c2.location << -0.185, -0.195, -0.125;
  c2.scale = Matrix(3, 3);
  c2.scale << 0.37, 0.15, 0.24,
              0.15, 0.39, 0.18,
              0.24, 0.18, 0.25;
  innov.components = {c1, c2};
  return innov;
}

}  // namespace bvmem
