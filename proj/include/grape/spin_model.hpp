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

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "grape/types.hpp"

// Liouville-space model of small spin-1/2 systems.
//
// States and superoperators are expressed in the normalised product-operator
// basis: for each spin the orthonormal set {1, 2Lx, 2Ly, 2Lz}/sqrt(2), with
// spin 0 as the most significant (leftmost Kronecker) factor. The basis is a
// unitary change of coordinates from the column-stacked vectorisation of the
// density matrix, so inner products and norms are the Hilbert-Schmidt ones.
namespace grape::spin {

enum class axis { x, y, z };

struct spin_operators {
  cx_mat lx;
  cx_mat ly;
  cx_mat lz;
};

// Gyromagnetic ratio in rad s^-1 T^-1. Supported: 1H, 13C, 19F, 14N.
double gyromagnetic_ratio(std::string_view isotope);

// Resonance offset in Hz corresponding to a chemical shift in ppm.
double ppm_to_hz(std::string_view isotope, double magnet_field, double ppm);

struct spin_system {
  std::vector<std::string> isotopes;
  double magnet_field = 0.0;  // tesla
  std::vector<double> offsets_hz;  // empty means all on resonance
  // keyed by (i, j) with i < j
  std::map<std::pair<std::size_t, std::size_t>, double> j_couplings_hz;
  // rad/s, product-operator basis, dimension 4^n
  std::optional<cx_mat> relaxation;

  std::size_t spin_count() const { return isotopes.size(); }
  std::size_t hilbert_dim() const { return std::size_t{1} << spin_count(); }
  std::size_t liouville_dim() const { return hilbert_dim() * hilbert_dim(); }

  void set_coupling(std::size_t i, std::size_t j, double hz);
  double coupling(std::size_t i, std::size_t j) const;
  double offset(std::size_t i) const;

  // Throws invalid_input on unknown isotopes, bad coupling keys, or a
  // relaxation matrix of the wrong size.
  void validate() const;
};

spin_operators build_single_spin_operators();

// Hilbert-space operator L_axis acting on one spin of the system.
cx_mat spin_operator(std::size_t spin_count, std::size_t spin, axis ax);

// Columns are the column-stacked normalised product operators.
cx_mat product_operator_basis(std::size_t spin_count);

// Matrix of rho -> [H, rho] in the product-operator basis.
cx_mat commutation_superoperator(const cx_mat &hamiltonian);

// Product-operator coefficients of a Hilbert-space operator (not normalised).
cx_vec to_liouville(const cx_mat &op);

// Hilbert-space Hamiltonian in rad/s: offsets plus J terms, isotropic between
// like isotopes and zz-only between unlike ones.
cx_mat build_hamiltonian(const spin_system &system);

// Commutation superoperator of build_hamiltonian. Relaxation is not folded in.
cx_mat build_drift(const spin_system &system);

// build_drift + i*R, the full uncontrolled generator used by the propagators.
cx_mat drift_generator(const spin_system &system);

struct control_channel {
  std::string name;
  std::vector<std::size_t> spins;
  axis ax = axis::x;
};

// One commutation superoperator of sum_{i in spins} L_axis(i) per channel.
// Amplitudes multiplying these are angular frequencies.
std::vector<cx_mat> build_controls(const spin_system &system,
                                   std::span<const control_channel> channels);

struct state_spec {
  enum class kind { lz_sum, singlet };
  kind type = kind::lz_sum;
  std::vector<std::size_t> spins;
};

// Unit-norm state vector. Singlet is the traceless part of |S><S|.
cx_vec build_state(const spin_system &system, const state_spec &spec);

}  // namespace grape::spin
