#ifndef CEMDG_MEDIUM_HPP
#define CEMDG_MEDIUM_HPP

#include <cstdint>
#include <string>

#include "cemdg/grid.hpp"
#include "cemdg/types.hpp"

namespace cemdg {

/// Piecewise-constant permeability on the fine grid, one positive value per
/// fine cell, global row-major from the bottom-left cell.
struct PermeabilityField {
  int nx = 0, ny = 0;  // fine cells per direction
  Vector values;
  std::string source;

  double cell(int gx, int gy) const { return values[gy * nx + gx]; }
  double min() const { return values.minCoeff(); }
  double max() const { return values.maxCoeff(); }
};

enum class FieldKind { channels, inclusions, mixed };

FieldKind parse_field_kind(const std::string& name);
std::string field_kind_name(FieldKind kind);

/// File format: first line "nx ny", then ny rows of nx whitespace-separated
/// positive reals, row-major from the bottom-left cell.
PermeabilityField load_field(const std::string& path, const GridModel& grid);
void save_field(const std::string& path, const PermeabilityField& field);

/// Background 1, features at the contrast value, deterministic in the seed.
/// Randomness comes from std::mt19937_64(seed) with modulo reduction for
/// bounded draws; the draw order is fixed by the implementation.
PermeabilityField generate_field(FieldKind kind, double contrast, std::uint64_t seed,
                                 const GridModel& grid);

/// Bilinear coarse hat functions chi_j, one per coarse node. Evaluated
/// analytically; value(j, x, y) gives the nodal value and gradient(j, x, y)
/// the gradient (constant per evaluation point).
class PartitionOfUnity {
 public:
  explicit PartitionOfUnity(const GridModel& grid) : grid_(&grid) {}

  double value(int node, double x, double y) const;
  Vector2 gradient(int node, double x, double y) const;

  /// sum_j |grad chi_j|^2 at a point (only the 4 hats of the containing
  /// coarse cell contribute)
  double sum_grad_sq(double x, double y) const;

  /// chi_node evaluated at every dof's geometric fine-node position
  Vector values_at_dofs(int node) const;

  const GridModel& grid() const { return *grid_; }

 private:
  const GridModel* grid_;
};

/// kappa_tilde, one nonnegative real per fine cell:
/// kappa * sum_j |grad chi_j|^2 sampled at the fine-cell center.
struct WeightField {
  Vector values;  // per fine cell, global row-major
};

WeightField compute_kappa_tilde(const PermeabilityField& field, const PartitionOfUnity& pou);

}  // namespace cemdg

#endif
