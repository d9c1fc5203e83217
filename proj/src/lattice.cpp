#include "gravising/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gravising {

LatticeGeometry::LatticeGeometry(int side, int dimension, int cell_side)
    : side_(side), dimension_(dimension), cell_side_(cell_side) {
  if (side < 1) throw std::invalid_argument("lattice: N must be positive");
  if (dimension < 1 || dimension > 3) throw std::invalid_argument("lattice: d must be 1, 2 or 3");
  if (cell_side < 1) throw std::invalid_argument("lattice: a_N must be positive");
  if (side % cell_side != 0) throw std::invalid_argument("lattice: a_N must divide N");
  site_count_ = 1;
  cell_count_ = 1;
  for (int k = 0; k < dimension; ++k) {
    site_count_ *= side;
    cell_count_ *= side / cell_side;
  }
}

int LatticeGeometry::site_coordinate(std::int64_t site, int axis) const {
  for (int k = 0; k < axis; ++k) site /= side_;
  return static_cast<int>(site % side_);
}

int LatticeGeometry::cell_layer(std::int64_t cell) const {
  const int l = cells_per_side();
  for (int k = 0; k < dimension_ - 1; ++k) cell /= l;
  return static_cast<int>(cell % l);
}

std::int64_t LatticeGeometry::cell_of_site(std::int64_t site) const {
  const int l = cells_per_side();
  std::int64_t cell = 0;
  std::int64_t stride = 1;
  for (int k = 0; k < dimension_; ++k) {
    const int c = static_cast<int>(site % side_) / cell_side_;
    site /= side_;
    cell += c * stride;
    stride *= l;
  }
  return cell;
}

double LatticeGeometry::cell_height(std::int64_t cell) const {
  return (cell_layer(cell) + 0.5) / cells_per_side();
}

std::vector<int> LatticeGeometry::cell_origin(std::int64_t cell) const {
  const int l = cells_per_side();
  std::vector<int> origin(static_cast<std::size_t>(dimension_));
  for (int k = 0; k < dimension_; ++k) {
    origin[static_cast<std::size_t>(k)] = static_cast<int>(cell % l) * cell_side_;
    cell /= l;
  }
  return origin;
}

FieldSpec FieldSpec::gravitational(LatticeGeometry geometry, double g, int exponent) {
  if (exponent != 1 && exponent != 2) {
    throw std::invalid_argument("gravitational field: exponent must be 1 or 2");
  }
  if (!std::isfinite(g)) throw std::invalid_argument("gravitational field: g must be finite");
  FieldSpec f(Kind::Gravitational, geometry);
  f.g_ = g;
  f.exponent_ = exponent;
  return f;
}

FieldSpec FieldSpec::explicit_cells(LatticeGeometry geometry, std::vector<double> cell_values) {
  if (static_cast<std::int64_t>(cell_values.size()) != geometry.cell_count()) {
    throw std::invalid_argument("explicit field: need one value per cell");
  }
  for (double v : cell_values) {
    if (!std::isfinite(v)) throw std::invalid_argument("explicit field: non-finite value");
  }
  FieldSpec f(Kind::Explicit, geometry);
  f.cells_ = std::move(cell_values);
  return f;
}

FieldSpec FieldSpec::constant(LatticeGeometry geometry, double value) {
  return explicit_cells(geometry,
                        std::vector<double>(static_cast<std::size_t>(geometry.cell_count()), value));
}

namespace {
double scale_for(const LatticeGeometry& geom, double g, int exponent) {
  double n = geom.side();
  return exponent == 1 ? g / n : g / (n * n);
}
}  // namespace

double FieldSpec::at_site(std::int64_t site) const {
  if (kind_ == Kind::Gravitational) {
    return scale_for(geometry_, g_, exponent_) * (geometry_.site_height(site) + 0.5) + offset_;
  }
  return cells_[static_cast<std::size_t>(geometry_.cell_of_site(site))] + offset_;
}

double FieldSpec::at_cell(std::int64_t cell) const {
  if (kind_ == Kind::Gravitational) {
    const double centre = (geometry_.cell_layer(cell) + 0.5) * geometry_.cell_side();
    return scale_for(geometry_, g_, exponent_) * centre + offset_;
  }
  return cells_[static_cast<std::size_t>(cell)] + offset_;
}

std::vector<double> FieldSpec::site_values() const {
  std::vector<double> out(static_cast<std::size_t>(geometry_.site_count()));
  for (std::int64_t i = 0; i < geometry_.site_count(); ++i) {
    out[static_cast<std::size_t>(i)] = at_site(i);
  }
  return out;
}

std::vector<double> FieldSpec::cell_values() const {
  std::vector<double> out(static_cast<std::size_t>(geometry_.cell_count()));
  for (std::int64_t c = 0; c < geometry_.cell_count(); ++c) {
    out[static_cast<std::size_t>(c)] = at_cell(c);
  }
  return out;
}

double FieldSpec::sup_norm() const {
  double s = 0.0;
  if (kind_ == Kind::Gravitational) {
    const double scale = scale_for(geometry_, g_, exponent_);
    s = std::max(std::abs(scale * 0.5 + offset_),
                 std::abs(scale * (geometry_.side() - 0.5) + offset_));
  } else {
    for (double v : cells_) s = std::max(s, std::abs(v + offset_));
  }
  return s;
}

double FieldSpec::variation_bound() const {
  if (kind_ == Kind::Gravitational) {
    // Sites closer than a_N in sup-distance differ by at most a_N - 1 in height.
    return std::abs(scale_for(geometry_, g_, exponent_)) * geometry_.cell_side();
  }
  // Such sites lie in the same or in adjacent (possibly diagonal) cells.
  const int l = geometry_.cells_per_side();
  const int d = geometry_.dimension();
  double worst = 0.0;
  for (std::int64_t c = 0; c < geometry_.cell_count(); ++c) {
    std::vector<int> idx(static_cast<std::size_t>(d));
    std::int64_t rest = c;
    for (int k = 0; k < d; ++k) {
      idx[static_cast<std::size_t>(k)] = static_cast<int>(rest % l);
      rest /= l;
    }
    int neighbours = 1;
    for (int k = 0; k < d; ++k) neighbours *= 3;
    for (int code = 0; code < neighbours; ++code) {
      int cc = code;
      std::int64_t other = 0;
      std::int64_t stride = 1;
      bool inside = true;
      for (int k = 0; k < d; ++k) {
        const int shifted = idx[static_cast<std::size_t>(k)] + (cc % 3) - 1;
        cc /= 3;
        if (shifted < 0 || shifted >= l) {
          inside = false;
          break;
        }
        other += shifted * stride;
        stride *= l;
      }
      if (!inside) continue;
      worst = std::max(worst, std::abs(cells_[static_cast<std::size_t>(c)] -
                                       cells_[static_cast<std::size_t>(other)]));
    }
  }
  return std::nextafter(worst, std::numeric_limits<double>::infinity());
}

FieldSpec FieldSpec::shifted(double constant) const {
  FieldSpec f = *this;
  f.offset_ += constant;
  return f;
}

}  // namespace gravising
