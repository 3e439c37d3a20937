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

#include "grape/spin_model.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace grape::spin {

namespace {

struct isotope_entry {
  std::string_view label;
  double gamma;
};

// IUPAC recommended values, Harris et al., Pure Appl. Chem. 73 (2001) 1795.
constexpr std::array<isotope_entry, 4> isotope_table{{
    {"1H", 26.7522128e7},
    {"13C", 6.728284e7},
    {"19F", 25.18148e7},
    {"14N", 1.9337792e7},
}};

constexpr double two_pi = 2.0 * std::numbers::pi;

cx_mat kron(const cx_mat &a, const cx_mat &b) {
  cx_mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

std::size_t spins_from_hilbert_dim(Eigen::Index dim) {
  std::size_t n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim)
    throw invalid_input("operator dimension is not a power of two");
  return n;
}

}  // namespace

double gyromagnetic_ratio(std::string_view isotope) {
  for (const auto &entry : isotope_table)
    if (entry.label == isotope) return entry.gamma;
  throw invalid_input("unknown isotope: " + std::string(isotope));
}

double ppm_to_hz(std::string_view isotope, double magnet_field, double ppm) {
  return gyromagnetic_ratio(isotope) * magnet_field * ppm * 1e-6 / two_pi;
}

void spin_system::set_coupling(std::size_t i, std::size_t j, double hz) {
  if (i == j) throw invalid_input("J-coupling of a spin with itself");
  j_couplings_hz[{std::min(i, j), std::max(i, j)}] = hz;
}

double spin_system::coupling(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  auto it = j_couplings_hz.find({std::min(i, j), std::max(i, j)});
  return it == j_couplings_hz.end() ? 0.0 : it->second;
}

double spin_system::offset(std::size_t i) const {
  return offsets_hz.empty() ? 0.0 : offsets_hz.at(i);
}

void spin_system::validate() const {
  if (isotopes.empty()) throw invalid_input("spin system has no spins");
  if (isotopes.size() > 5)
    throw invalid_input("dense Liouville space limited to five spins");
  for (const auto &iso : isotopes) gyromagnetic_ratio(iso);
  if (!offsets_hz.empty() && offsets_hz.size() != isotopes.size())
    throw invalid_input("offset count does not match spin count");
  for (const auto &[key, hz] : j_couplings_hz) {
    if (key.first >= key.second)
      throw invalid_input("J-coupling keys must satisfy i < j");
    if (key.second >= isotopes.size())
      throw invalid_input("J-coupling references unknown spin");
    if (!std::isfinite(hz)) throw invalid_input("non-finite J-coupling");
  }
  if (relaxation) {
    const auto dim = static_cast<Eigen::Index>(liouville_dim());
    if (relaxation->rows() != dim || relaxation->cols() != dim)
      throw invalid_input("relaxation matrix dimension must be 4^n");
  }
}

spin_operators build_single_spin_operators() {
  using namespace std::complex_literals;
  spin_operators ops{cx_mat(2, 2), cx_mat(2, 2), cx_mat(2, 2)};
  ops.lx << 0.0, 0.5, 0.5, 0.0;
  ops.ly << 0.0, -0.5i, 0.5i, 0.0;
  ops.lz << 0.5, 0.0, 0.0, -0.5;
  return ops;
}

cx_mat spin_operator(std::size_t spin_count, std::size_t spin, axis ax) {
  if (spin >= spin_count) throw invalid_input("spin index out of range");
  const auto ops = build_single_spin_operators();
  const cx_mat &single = ax == axis::x ? ops.lx : ax == axis::y ? ops.ly : ops.lz;
  const auto left = Eigen::Index{1} << spin;
  const auto right = Eigen::Index{1} << (spin_count - spin - 1);
  return kron(kron(cx_mat::Identity(left, left), single),
              cx_mat::Identity(right, right));
}

cx_mat product_operator_basis(std::size_t spin_count) {
  const auto ops = build_single_spin_operators();
  const double s = std::sqrt(2.0);
  const std::array<cx_mat, 4> single{cx_mat(cx_mat::Identity(2, 2) / s),
                                     cx_mat(ops.lx * s), cx_mat(ops.ly * s),
                                     cx_mat(ops.lz * s)};
  const auto hdim = Eigen::Index{1} << spin_count;
  const auto ldim = hdim * hdim;
  cx_mat basis(ldim, ldim);
  for (Eigen::Index a = 0; a < ldim; ++a) {
    cx_mat op = cx_mat::Identity(1, 1);
    for (std::size_t k = 0; k < spin_count; ++k) {
      const auto digit = (a >> (2 * (spin_count - 1 - k))) & 3;
      op = kron(op, single[static_cast<std::size_t>(digit)]);
    }
    basis.col(a) = op.reshaped();
  }
  return basis;
}

cx_mat commutation_superoperator(const cx_mat &hamiltonian) {
  if (hamiltonian.rows() != hamiltonian.cols())
    throw invalid_input("Hamiltonian must be square");
  const auto n = spins_from_hilbert_dim(hamiltonian.rows());
  const auto dim = hamiltonian.rows();
  const cx_mat id = cx_mat::Identity(dim, dim);
  // column stacking: vec(H rho) = (1 (x) H) vec(rho), vec(rho H) = (H^T (x) 1) vec(rho)
  const cx_mat stacked = kron(id, hamiltonian) - kron(hamiltonian.transpose(), id);
  const cx_mat basis = product_operator_basis(n);
  return basis.adjoint() * stacked * basis;
}

cx_vec to_liouville(const cx_mat &op) {
  if (op.rows() != op.cols()) throw invalid_input("operator must be square");
  const auto n = spins_from_hilbert_dim(op.rows());
  return product_operator_basis(n).adjoint() * op.reshaped();
}

cx_mat build_hamiltonian(const spin_system &system) {
  system.validate();
  const auto n = system.spin_count();
  const auto hdim = static_cast<Eigen::Index>(system.hilbert_dim());
  cx_mat h = cx_mat::Zero(hdim, hdim);
  for (std::size_t i = 0; i < n; ++i) {
    const double offset = system.offset(i);
    if (offset != 0.0) h += two_pi * offset * spin_operator(n, i, axis::z);
  }
  for (const auto &[key, hz] : system.j_couplings_hz) {
    if (hz == 0.0) continue;
    // In the rotating frame of two different isotopes only the zz part survives.
    const bool homonuclear = system.isotopes[key.first] == system.isotopes[key.second];
    for (auto ax : {axis::x, axis::y, axis::z}) {
      if (!homonuclear && ax != axis::z) continue;
      h += two_pi * hz * spin_operator(n, key.first, ax) * spin_operator(n, key.second, ax);
    }
  }
  return h;
}

cx_mat build_drift(const spin_system &system) {
  return commutation_superoperator(build_hamiltonian(system));
}

cx_mat drift_generator(const spin_system &system) {
  cx_mat drift = build_drift(system);
  if (system.relaxation) drift += cx{0.0, 1.0} * *system.relaxation;
  return drift;
}

std::vector<cx_mat> build_controls(const spin_system &system,
                                   std::span<const control_channel> channels) {
  system.validate();
  const auto n = system.spin_count();
  const auto hdim = static_cast<Eigen::Index>(system.hilbert_dim());
  std::vector<cx_mat> out;
  out.reserve(channels.size());
  for (const auto &channel : channels) {
    if (channel.ax == axis::z)
      throw invalid_input("control channel " + channel.name + " must be x or y");
    cx_mat h = cx_mat::Zero(hdim, hdim);
    for (auto s : channel.spins) {
      if (s >= n)
        throw invalid_input("control channel " + channel.name + " references unknown spin");
      h += spin_operator(n, s, channel.ax);
    }
    out.push_back(commutation_superoperator(h));
  }
  return out;
}

cx_vec build_state(const spin_system &system, const state_spec &spec) {
  system.validate();
  const auto n = system.spin_count();
  for (auto s : spec.spins)
    if (s >= n) throw invalid_input("state references unknown spin");
  const auto hdim = static_cast<Eigen::Index>(system.hilbert_dim());
  cx_mat op = cx_mat::Zero(hdim, hdim);
  switch (spec.type) {
    case state_spec::kind::lz_sum:
      if (spec.spins.empty()) throw invalid_input("Lz state needs at least one spin");
      for (auto s : spec.spins) op += spin_operator(n, s, axis::z);
      break;
    case state_spec::kind::singlet: {
      if (spec.spins.size() != 2 || spec.spins[0] == spec.spins[1])
        throw invalid_input("singlet state needs exactly two distinct spins");
      // |S><S| = 1/4 - L1.L2, the traceless part is -L1.L2
      for (auto ax : {axis::x, axis::y, axis::z})
        op -= spin_operator(n, spec.spins[0], ax) * spin_operator(n, spec.spins[1], ax);
      break;
    }
  }
  cx_vec v = to_liouville(op);
  const double norm = v.norm();
  if (norm == 0.0) throw invalid_input("state operator is zero");
  return v / norm;
}

}  // namespace grape::spin
