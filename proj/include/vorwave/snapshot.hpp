#ifndef VORWAVE_SNAPSHOT_HPP
#define VORWAVE_SNAPSHOT_HPP

#include "vorwave/solver.hpp"

#include <string>

namespace vorwave {
namespace snapshot {

// Field snapshot: CSV with columns ell_1..ell_nu, j, re, im (coefficients of a
// TorusField); round-trips exactly through the 17-digit formatting.
void save_field_csv(const TorusField& f, const std::string& path);
TorusField load_field_csv(const std::string& path, int nu, int n_phi, int n_modes);

// Torus snapshot: <base>.json header (physics, sites, cutoffs, omega, alpha,
// xi, epsilon) plus <base>.csv holding all field components, tagged by name.
void save_torus(const solver::TorusEmbedding& emb, const std::string& base);
solver::TorusEmbedding load_torus(const std::string& base);

} // namespace snapshot
} // namespace vorwave

#endif
