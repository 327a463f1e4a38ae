#include "cemdg/medium.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace cemdg {

FieldKind parse_field_kind(const std::string& name) {
  if (name == "channels") return FieldKind::channels;
  if (name == "inclusions") return FieldKind::inclusions;
  if (name == "mixed") return FieldKind::mixed;
  throw ConfigError("unknown field kind: " + name);
}

std::string field_kind_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::channels: return "channels";
    case FieldKind::inclusions: return "inclusions";
    default: return "mixed";
  }
}

PermeabilityField load_field(const std::string& path, const GridModel& grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_field: cannot open " + path);
  int nx = 0, ny = 0;
  if (!(in >> nx >> ny)) throw ConfigError("load_field: parse failure in header of " + path);
  if (nx != grid.n_fine_x() || ny != grid.n_fine_y()) {
    std::ostringstream msg;
    msg << "load_field: dimension mismatch, file is " << nx << "x" << ny << " but grid needs "
        << grid.n_fine_x() << "x" << grid.n_fine_y();
    throw ConfigError(msg.str());
  }
  PermeabilityField f;
  f.nx = nx;
  f.ny = ny;
  f.values.resize(static_cast<Eigen::Index>(nx) * ny);
  f.source = "file:" + path;
  for (Eigen::Index i = 0; i < f.values.size(); ++i) {
    double v;
    if (!(in >> v)) throw ConfigError("load_field: parse failure at entry " + std::to_string(i));
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError("load_field: nonpositive permeability at entry " + std::to_string(i));
    f.values[i] = v;
  }
  return f;
}

void save_field(const std::string& path, const PermeabilityField& field) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_field: cannot open " + path);
  out << field.nx << " " << field.ny << "\n";
  out.precision(17);
  for (int gy = 0; gy < field.ny; ++gy) {
    for (int gx = 0; gx < field.nx; ++gx) {
      if (gx) out << " ";
      out << field.cell(gx, gy);
    }
    out << "\n";
  }
}

namespace {

// bounded draw from the raw 64-bit stream; draw order is part of the
// determinism contract
std::uint64_t draw(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return lo + rng() % (hi - lo + 1);
}

void fill_rect(PermeabilityField& f, int x, int y, int w, int h, double value) {
  for (int gy = y; gy < y + h; ++gy)
    for (int gx = x; gx < x + w; ++gx) f.values[gy * f.nx + gx] = value;
}

void add_channels(PermeabilityField& f, std::mt19937_64& rng, int count_h, int count_v,
                  double value) {
  for (int k = 0; k < count_h; ++k) {
    const int w = static_cast<int>(draw(rng, 2, 6));
    const int row = static_cast<int>(draw(rng, 0, f.ny - w));
    fill_rect(f, 0, row, f.nx, w, value);
  }
  for (int k = 0; k < count_v; ++k) {
    const int w = static_cast<int>(draw(rng, 2, 6));
    const int col = static_cast<int>(draw(rng, 0, f.nx - w));
    fill_rect(f, col, 0, w, f.ny, value);
  }
}

void add_inclusions(PermeabilityField& f, std::mt19937_64& rng, int count, double value) {
  for (int k = 0; k < count; ++k) {
    const int w = static_cast<int>(draw(rng, 2, std::min(8, f.nx)));
    const int h = static_cast<int>(draw(rng, 2, std::min(8, f.ny)));
    const int x = static_cast<int>(draw(rng, 0, f.nx - w));
    const int y = static_cast<int>(draw(rng, 0, f.ny - h));
    fill_rect(f, x, y, w, h, value);
  }
}

}  // namespace

PermeabilityField generate_field(FieldKind kind, double contrast, std::uint64_t seed,
                                 const GridModel& grid) {
  if (!(contrast >= 1.0)) throw ConfigError("generate_field: contrast must be >= 1");
  PermeabilityField f;
  f.nx = grid.n_fine_x();
  f.ny = grid.n_fine_y();
  f.values = Vector::Ones(static_cast<Eigen::Index>(f.nx) * f.ny);
  {
    std::ostringstream meta;
    meta << "generated:" << field_kind_name(kind) << " contrast=" << contrast
         << " seed=" << seed;
    f.source = meta.str();
  }

  std::mt19937_64 rng(seed);
  const int ch_h = std::max(1, f.ny / 64);
  const int ch_v = std::max(1, f.nx / 64);
  const int incl = std::max(4, f.nx * f.ny / 2048);
  switch (kind) {
    case FieldKind::channels:
      add_channels(f, rng, ch_h, ch_v, contrast);
      break;
    case FieldKind::inclusions:
      add_inclusions(f, rng, incl, contrast);
      break;
    case FieldKind::mixed:
      add_channels(f, rng, std::max(1, ch_h / 2), std::max(1, ch_v / 2), contrast);
      add_inclusions(f, rng, std::max(2, incl / 2), contrast);
      break;
  }
  return f;
}

namespace {

// 1D hat factor of coarse node index g at local coordinate of cell c
inline double hat_factor(int g, int c, double t) {
  if (g == c) return 1.0 - t;
  if (g == c + 1) return t;
  return 0.0;
}

inline double hat_factor_deriv(int g, int c) {
  if (g == c) return -1.0;
  if (g == c + 1) return 1.0;
  return 0.0;
}

}  // namespace

double PartitionOfUnity::value(int node, double x, double y) const {
  const GridModel& g = *grid_;
  int cx = static_cast<int>(std::floor((x - g.config.x0) / g.Hx));
  int cy = static_cast<int>(std::floor((y - g.config.y0) / g.Hy));
  cx = std::clamp(cx, 0, g.topo.nx - 1);
  cy = std::clamp(cy, 0, g.topo.ny - 1);
  const double tx = (x - (g.config.x0 + cx * g.Hx)) / g.Hx;
  const double ty = (y - (g.config.y0 + cy * g.Hy)) / g.Hy;
  const int gx = node % (g.topo.nx + 1), gy = node / (g.topo.nx + 1);
  return hat_factor(gx, cx, tx) * hat_factor(gy, cy, ty);
}

Vector2 PartitionOfUnity::gradient(int node, double x, double y) const {
  const GridModel& g = *grid_;
  int cx = static_cast<int>(std::floor((x - g.config.x0) / g.Hx));
  int cy = static_cast<int>(std::floor((y - g.config.y0) / g.Hy));
  cx = std::clamp(cx, 0, g.topo.nx - 1);
  cy = std::clamp(cy, 0, g.topo.ny - 1);
  const double tx = (x - (g.config.x0 + cx * g.Hx)) / g.Hx;
  const double ty = (y - (g.config.y0 + cy * g.Hy)) / g.Hy;
  const int gx = node % (g.topo.nx + 1), gy = node / (g.topo.nx + 1);
  return {hat_factor_deriv(gx, cx) / g.Hx * hat_factor(gy, cy, ty),
          hat_factor(gx, cx, tx) * hat_factor_deriv(gy, cy) / g.Hy};
}

double PartitionOfUnity::sum_grad_sq(double x, double y) const {
  const GridModel& g = *grid_;
  int cx = static_cast<int>(std::floor((x - g.config.x0) / g.Hx));
  int cy = static_cast<int>(std::floor((y - g.config.y0) / g.Hy));
  cx = std::clamp(cx, 0, g.topo.nx - 1);
  cy = std::clamp(cy, 0, g.topo.ny - 1);
  double total = 0.0;
  for (int dy = 0; dy <= 1; ++dy)
    for (int dx = 0; dx <= 1; ++dx) {
      const Vector2 gr = gradient(g.coarse_node_id(cx + dx, cy + dy), x, y);
      total += gr.squaredNorm();
    }
  return total;
}

Vector PartitionOfUnity::values_at_dofs(int node) const {
  const GridModel& g = *grid_;
  Vector out = Vector::Zero(g.dofs.total_dofs);
  for (int b = 0; b < g.n_blocks(); ++b) {
    for (int fy = 0; fy <= g.nfy(); ++fy) {
      for (int fx = 0; fx <= g.nfx(); ++fx) {
        const int d = g.dofs.dof(b, g.local_node(fx, fy));
        if (d < 0) continue;
        out[d] = value(node, g.node_x(g.global_fx(b, fx)), g.node_y(g.global_fy(b, fy)));
      }
    }
  }
  return out;
}

WeightField compute_kappa_tilde(const PermeabilityField& field, const PartitionOfUnity& pou) {
  const GridModel& g = pou.grid();
  WeightField w;
  w.values.resize(field.values.size());
  for (int gy = 0; gy < field.ny; ++gy) {
    const double yc = g.config.y0 + (gy + 0.5) * g.hy;
    for (int gx = 0; gx < field.nx; ++gx) {
      const double xc = g.config.x0 + (gx + 0.5) * g.hx;
      w.values[gy * field.nx + gx] = field.cell(gx, gy) * pou.sum_grad_sq(xc, yc);
    }
  }
  return w;
}

}  // namespace cemdg
