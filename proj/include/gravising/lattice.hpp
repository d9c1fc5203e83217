#pragma once

// Box Lambda_N = {0..N-1}^d, its coarse cell grid Gamma_N of side a, and the
// slowly varying magnetic fields that live on them.
//
// Linear indices run with coordinate 0 fastest; coordinate d-1 is the height.

#include <cstdint>
#include <vector>

namespace gravising {

class LatticeGeometry {
 public:
  LatticeGeometry(int side, int dimension, int cell_side);

  int side() const { return side_; }
  int dimension() const { return dimension_; }
  int cell_side() const { return cell_side_; }
  int cells_per_side() const { return side_ / cell_side_; }

  std::int64_t site_count() const { return site_count_; }
  std::int64_t cell_count() const { return cell_count_; }

  /// Coordinate `axis` of site `site`.
  int site_coordinate(std::int64_t site, int axis) const;
  int site_height(std::int64_t site) const { return site_coordinate(site, dimension_ - 1); }
  /// Layer index (last coordinate) of cell `cell`.
  int cell_layer(std::int64_t cell) const;
  /// Cell containing `site`.
  std::int64_t cell_of_site(std::int64_t site) const;
  /// Macroscopic height in [0, 1) of the centre of `cell`.
  double cell_height(std::int64_t cell) const;
  /// Lattice coordinates of the base (bottom-left) vertex of `cell`.
  std::vector<int> cell_origin(std::int64_t cell) const;

  friend bool operator==(const LatticeGeometry&, const LatticeGeometry&) = default;

 private:
  int side_;
  int dimension_;
  int cell_side_;
  std::int64_t site_count_;
  std::int64_t cell_count_;
};

/// A slowly varying field h_N on Lambda_N.
///
/// Gravitational fields are evaluated at site centres, h_N(i) = g (i_d + 1/2) / N^e.
/// This differs from g i_d / N^e by the constant g / (2 N^e), which in the
/// fixed-magnetization ensemble only shifts the optimal offset h-bar. With it
/// the field is symmetric about g/2 and cell values equal cell averages.
class FieldSpec {
 public:
  enum class Kind { Gravitational, Explicit };

  static FieldSpec gravitational(LatticeGeometry geometry, double g, int exponent = 1);
  /// One value per cell of Gamma_N; every site takes the value of its cell.
  static FieldSpec explicit_cells(LatticeGeometry geometry, std::vector<double> cell_values);
  static FieldSpec constant(LatticeGeometry geometry, double value);

  Kind kind() const { return kind_; }
  const LatticeGeometry& geometry() const { return geometry_; }
  double g() const { return g_; }
  int exponent() const { return exponent_; }

  double at_site(std::int64_t site) const;
  double at_cell(std::int64_t cell) const;
  std::vector<double> site_values() const;
  std::vector<double> cell_values() const;

  /// sup_i |h_N(i)|.
  double sup_norm() const;
  /// Witness b_N: |h(i) - h(j)| < b_N whenever sup-distance(i, j) < a_N.
  double variation_bound() const;

  /// Same field with a constant added everywhere.
  FieldSpec shifted(double constant) const;

 private:
  FieldSpec(Kind kind, LatticeGeometry geometry) : kind_(kind), geometry_(geometry) {}

  Kind kind_;
  LatticeGeometry geometry_;
  double g_ = 0.0;
  int exponent_ = 1;
  double offset_ = 0.0;
  std::vector<double> cells_;
};

}  // namespace gravising
