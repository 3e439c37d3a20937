/* Copyright 2026 The Newton-GRAPE Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "grape/expm.hpp"

#include <algorithm>
#include <cmath>

namespace grape {

const double pade13_coefficients[14] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

int expm_squarings(double one_norm) {
  if (!(one_norm > pade13_theta)) return 0;
  return std::max(0, static_cast<int>(std::ceil(std::log2(one_norm / pade13_theta))));
}

cx_mat expm(const cx_mat &a) {
  if (a.rows() != a.cols()) throw invalid_input("expm: matrix must be square");
  if (!a.allFinite()) throw invalid_input("expm: non-finite entries");
  const auto n = a.rows();
  if (n == 0) return a;
  const double *b = pade13_coefficients;

  const int s = expm_squarings(a.cwiseAbs().colwise().sum().maxCoeff());
  const cx_mat x = a * std::ldexp(1.0, -s);
  const cx_mat ident = cx_mat::Identity(n, n);
  const cx_mat x2 = x * x;
  const cx_mat x4 = x2 * x2;
  const cx_mat x6 = x4 * x2;

  cx_mat w = x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2);
  w += b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * ident;
  const cx_mat u = x * w;
  cx_mat v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2);
  v += b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * ident;

  cx_mat r = Eigen::PartialPivLU<cx_mat>(v - u).solve(v + u);
  for (int k = 0; k < s; ++k) r = (r * r).eval();
  return r;
}

}  // namespace grape
