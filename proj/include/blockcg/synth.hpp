#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blockcg/sparse.hpp"

namespace blockcg {

// Seeded SPD test-matrix generators. Experiments that cannot ship their
// SuiteSparse inputs use these; the spectrum is exact by construction
// (orthogonal similarity of a prescribed diagonal).

std::vector<double> logspace_spectrum(int n, double lo, double hi);

// diag(eigs) conjugated by `reflections` seeded Householder reflectors;
// dense pattern.
SparseSym spd_from_spectrum(const std::vector<double>& eigs, std::uint64_t seed, int reflections = 2);

// Same spectrum, tridiagonal pattern: Householder tridiagonalization of the
// mixed dense matrix. Cheap to multiply, handy for long runs.
SparseSym tridiag_from_spectrum(const std::vector<double>& eigs, std::uint64_t seed);

// Stiffness-like surrogate: a few low outliers below a tight ill-conditioned
// bulk; overall condition number = cond.
SparseSym spd_clustered(int n, double cond, std::uint64_t seed);

// Parses "synth:<kind>:n=<int>:cond=<real>:seed=<int>" matrix specs
// (kind: logspace | clustered | tridiag). Returns false if `spec` is not a
// synth spec at all.
bool parse_synth_spec(const std::string& spec, SparseSym& out, std::string& name);

}  // namespace blockcg
