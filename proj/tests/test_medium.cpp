#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <queue>
#include <set>

#include "cemdg/medium.hpp"
#include "oracles.hpp"

using namespace cemdg;

namespace {

GridModel make_grid(int coarse, int fine) {
  GridConfig c;
  c.coarse_nx = c.coarse_ny = coarse;
  c.fine_per_coarse_x = c.fine_per_coarse_y = fine;
  return build_grid(c);
}

std::string temp_file(const std::string& name) { return "/tmp/cemdg_test_" + name; }

// largest number of distinct coarse cells touched by one connected
// high-value component (4-neighbor connectivity on fine cells)
int max_feature_span(const PermeabilityField& f, const GridModel& g, double threshold) {
  std::vector<char> seen(f.values.size(), 0);
  int best = 0;
  for (int start = 0; start < static_cast<int>(f.values.size()); ++start) {
    if (seen[start] || f.values[start] < threshold) continue;
    std::set<int> coarse;
    std::queue<int> todo;
    todo.push(start);
    seen[start] = 1;
    while (!todo.empty()) {
      const int cell = todo.front();
      todo.pop();
      const int gx = cell % f.nx, gy = cell / f.nx;
      coarse.insert(g.block_id(gx / g.nfx(), gy / g.nfy()));
      const int nbr[4][2] = {{gx - 1, gy}, {gx + 1, gy}, {gx, gy - 1}, {gx, gy + 1}};
      for (const auto& n : nbr) {
        if (n[0] < 0 || n[0] >= f.nx || n[1] < 0 || n[1] >= f.ny) continue;
        const int id = n[1] * f.nx + n[0];
        if (!seen[id] && f.values[id] >= threshold) {
          seen[id] = 1;
          todo.push(id);
        }
      }
    }
    best = std::max(best, static_cast<int>(coarse.size()));
  }
  return best;
}

}  // namespace

TEST_CASE("field files round-trip and validate") {
  const GridModel g = make_grid(16, 16);

  SUBCASE("all ones parses") {
    const std::string path = temp_file("ones.txt");
    {
      std::ofstream out(path);
      out << "256 256\n";
      for (int r = 0; r < 256; ++r) {
        for (int c = 0; c < 256; ++c) out << "1.0 ";
        out << "\n";
      }
    }
    const PermeabilityField f = load_field(path, g);
    CHECK(f.min() == 1.0);
    CHECK(f.max() == 1.0);
    std::remove(path.c_str());
  }

  SUBCASE("nonpositive entry is rejected") {
    const GridModel g2 = make_grid(2, 2);
    const std::string path = temp_file("zero.txt");
    {
      std::ofstream out(path);
      out << "4 4\n";
      for (int i = 0; i < 16; ++i) out << (i == 5 ? "0.0" : "1.0") << " ";
    }
    CHECK_THROWS_WITH_AS(load_field(path, g2), doctest::Contains("nonpositive permeability"),
                         ConfigError);
    std::remove(path.c_str());
  }

  SUBCASE("dimension mismatch is rejected") {
    const std::string path = temp_file("mismatch.txt");
    {
      std::ofstream out(path);
      out << "256 255\n";
    }
    CHECK_THROWS_WITH_AS(load_field(path, g), doctest::Contains("dimension mismatch"),
                         ConfigError);
    std::remove(path.c_str());
  }

  SUBCASE("parse failure is rejected") {
    const GridModel g2 = make_grid(2, 2);
    const std::string path = temp_file("garbage.txt");
    {
      std::ofstream out(path);
      out << "4 4\n1.0 1.0 banana\n";
    }
    CHECK_THROWS_WITH_AS(load_field(path, g2), doctest::Contains("parse failure"), ConfigError);
    std::remove(path.c_str());
  }

  SUBCASE("save and reload is exact") {
    const GridModel g2 = make_grid(4, 4);
    const PermeabilityField f = generate_field(FieldKind::mixed, 1e4, 7, g2);
    const std::string path = temp_file("roundtrip.txt");
    save_field(path, f);
    const PermeabilityField back = load_field(path, g2);
    CHECK((back.values - f.values).lpNorm<Eigen::Infinity>() == 0.0);
    std::remove(path.c_str());
  }
}

TEST_CASE("generated fields") {
  const GridModel g = make_grid(16, 16);

  SUBCASE("contrast one is identically one") {
    for (FieldKind k : {FieldKind::channels, FieldKind::inclusions, FieldKind::mixed}) {
      const PermeabilityField f = generate_field(k, 1.0, 42, g);
      CHECK(f.min() == 1.0);
      CHECK(f.max() == 1.0);
    }
  }

  SUBCASE("channels span several coarse cells") {
    const PermeabilityField f = generate_field(FieldKind::channels, 1e4, 3, g);
    CHECK(f.min() == 1.0);
    CHECK(f.max() == 1e4);
    CHECK(max_feature_span(f, g, 1e4) >= 4);
  }

  SUBCASE("same seed gives bit-identical fields") {
    const PermeabilityField a = generate_field(FieldKind::mixed, 1e4, 99, g);
    const PermeabilityField b = generate_field(FieldKind::mixed, 1e4, 99, g);
    CHECK((a.values - b.values).lpNorm<Eigen::Infinity>() == 0.0);
    const PermeabilityField c = generate_field(FieldKind::mixed, 1e4, 100, g);
    CHECK((a.values - c.values).lpNorm<Eigen::Infinity>() > 0.0);
  }

  SUBCASE("contrast below one is rejected") {
    CHECK_THROWS_AS(generate_field(FieldKind::channels, 0.5, 1, g), ConfigError);
  }
}

TEST_CASE("partition of unity") {
  const GridModel g = make_grid(4, 3);
  const PartitionOfUnity pou(g);

  SUBCASE("hats sum to one at every fine node") {
    double worst = 0.0;
    for (int gy = 0; gy <= g.n_fine_y(); ++gy)
      for (int gx = 0; gx <= g.n_fine_x(); ++gx) {
        double sum = 0.0;
        for (int j = 0; j < g.n_coarse_nodes(); ++j)
          sum += pou.value(j, g.node_x(gx), g.node_y(gy));
        worst = std::max(worst, std::abs(sum - 1.0));
      }
    CHECK(worst <= 1e-14);
  }

  SUBCASE("hat is Kronecker delta at coarse nodes") {
    for (int j = 0; j < g.n_coarse_nodes(); ++j)
      for (int k = 0; k < g.n_coarse_nodes(); ++k) {
        const Vector2 xy = g.coarse_node_xy(k);
        CHECK(pou.value(j, xy[0], xy[1]) == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-14));
      }
  }

  SUBCASE("hat support is the node neighborhood") {
    const int j = g.coarse_node_id(1, 1);
    const Vector vals = pou.values_at_dofs(j);
    const auto omega = g.region_dofs(oversample_neighborhood(g, j, 0));
    for (int d = 0; d < g.dofs.total_dofs; ++d) {
      if (!std::binary_search(omega.begin(), omega.end(), d)) CHECK(vals[d] == 0.0);
    }
    CHECK(vals.maxCoeff() > 0.9);
  }
}

TEST_CASE("kappa tilde") {
  SUBCASE("value at a coarse-cell center for unit kappa") {
    // one fine cell per coarse cell puts the sample point at the center
    const GridModel g = make_grid(16, 1);
    const PartitionOfUnity pou(g);
    const PermeabilityField ones = oracle::constant_field(g);
    const WeightField kt = compute_kappa_tilde(ones, pou);
    CHECK(kt.values[5 * 16 + 7] == doctest::Approx(512.0).epsilon(1e-13));
    // and directly at the analytic center of any coarse cell
    CHECK(pou.sum_grad_sq(0.5 / 16 + 3.0 / 16, 0.5 / 16 + 2.0 / 16) ==
          doctest::Approx(512.0).epsilon(1e-13));
  }

  SUBCASE("linear in kappa and strictly positive") {
    const GridModel g = make_grid(4, 4);
    const PartitionOfUnity pou(g);
    PermeabilityField f = generate_field(FieldKind::mixed, 1e3, 5, g);
    const WeightField a = compute_kappa_tilde(f, pou);
    CHECK(a.values.minCoeff() > 0.0);
    PermeabilityField f2 = f;
    f2.values *= 3.5;
    const WeightField b = compute_kappa_tilde(f2, pou);
    for (Eigen::Index i = 0; i < a.values.size(); ++i)
      CHECK(b.values[i] == doctest::Approx(3.5 * a.values[i]).epsilon(1e-14));
  }
}
