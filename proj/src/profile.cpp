#include "ricci/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ricci/interpolation.hpp"
#include "ricci/weighted.hpp"

namespace ricci {

double cutoff_chi(double x) {
  if (x <= 0.5) return 0.0;
  if (x >= 2.0) return 1.0;
  const double s = std::log(2.0 * x) / std::log(4.0);  // 0 at x=1/2, 1 at x=2
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

void ProfileSpec::validate() const {
  if (dimension < 3)
    throw std::invalid_argument("ProfileSpec: dimension must be >= 3");
  if (const auto* b = std::get_if<BumpFamily>(&family)) {
    if (!(b->amplitude > -1.0))
      throw std::invalid_argument("ProfileSpec: bump amplitude must exceed -1");
    if (!(b->width > 0.0))
      throw std::invalid_argument("ProfileSpec: bump width must be positive");
  } else if (const auto* mt = std::get_if<MassTailFamily>(&family)) {
    if (mt->delta_tail && !(*mt->delta_tail < 0.0))
      throw std::invalid_argument("ProfileSpec: mass_tail decay exponent must be negative");
    if (!(mt->cutoff_radius > 0.0))
      throw std::invalid_argument("ProfileSpec: mass_tail cutoff radius must be positive");
  } else if (const auto* tb = std::get_if<TableFamily>(&family)) {
    if (tb->radii.size() != tb->values.size() || tb->radii.size() < 4)
      throw std::invalid_argument("ProfileSpec: table needs matching columns, length >= 4");
    for (double v : tb->values)
      if (!(v > 0.0))
        throw std::invalid_argument("ProfileSpec: table values must be strictly positive");
  }
}

std::optional<double> ProfileSpec::tail_exponent() const {
  if (const auto* mt = std::get_if<MassTailFamily>(&family))
    return mt->delta_tail.value_or(2.0 - dimension);
  return std::nullopt;
}

void MetricProfile::validate() const {
  if (!grid || f.size() != grid->size())
    throw std::invalid_argument("MetricProfile: values do not match grid");
  if (f[0] != 1.0)
    throw std::invalid_argument("MetricProfile: f must equal 1 at the center node");
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!(f[i] > 0.0) || !std::isfinite(f[i]))
      throw std::invalid_argument("MetricProfile: f must be positive and finite");
}

std::vector<double> MetricProfile::w() const {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] * f[i] - 1.0;
  return out;
}

MetricProfile sample_profile(const ProfileSpec& spec,
                             std::shared_ptr<const RadialGrid> grid) {
  spec.validate();
  if (!grid) throw std::invalid_argument("sample_profile: null grid");

  MetricProfile p;
  p.grid = grid;
  p.dimension = spec.dimension;
  p.f.resize(grid->size());

  if (std::holds_alternative<FlatFamily>(spec.family)) {
    std::fill(p.f.begin(), p.f.end(), 1.0);
  } else if (const auto* b = std::get_if<BumpFamily>(&spec.family)) {
    const double a = b->amplitude, s = b->width;
    for (std::size_t i = 0; i < p.f.size(); ++i) {
      const double r = grid->nodes[i];
      const double f2 = 1.0 + a * r * r * std::exp(-r * r / (s * s)) / (1.0 + r * r);
      p.f[i] = std::sqrt(f2);
    }
  } else if (const auto* mt = std::get_if<MassTailFamily>(&spec.family)) {
    const double expo = mt->delta_tail.value_or(2.0 - spec.dimension);
    for (std::size_t i = 1; i < p.f.size(); ++i) {
      const double r = grid->nodes[i];
      const double f2 =
          1.0 + 2.0 * mt->mass * std::pow(r, expo) * cutoff_chi(r / mt->cutoff_radius);
      if (!(f2 > 0.0))
        throw std::invalid_argument("sample_profile: mass_tail drives f^2 below zero");
      p.f[i] = std::sqrt(f2);
    }
    p.f[0] = 1.0;
  } else {
    const auto& tb = std::get<TableFamily>(spec.family);
    bool matches = tb.radii.size() == grid->size();
    if (matches)
      for (std::size_t i = 0; i < grid->size(); ++i)
        if (std::abs(tb.radii[i] - grid->nodes[i]) > 1e-12 * (1.0 + grid->nodes[i])) {
          matches = false;
          break;
        }
    if (matches) {
      p.f = tb.values;
    } else {
      std::cerr << "sample_profile: table radii differ from grid, re-interpolating "
                   "with monotone cubic\n";
      if (tb.radii.front() > 0.0 || tb.radii.back() < grid->r_max)
        throw std::invalid_argument("sample_profile: table does not cover [0, r_max]");
      const MonotoneCubic interp(tb.radii, tb.values);
      for (std::size_t i = 0; i < grid->size(); ++i) p.f[i] = interp(grid->nodes[i]);
    }
    if (std::abs(p.f[0] - 1.0) > 1e-8)
      throw std::invalid_argument("sample_profile: table value at r = 0 must be 1");
    p.f[0] = 1.0;
  }

  p.validate();
  return p;
}

TableFamily load_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_table_csv: cannot open " + path);
  TableFamily tb;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double r, f;
    if (!(row >> r >> f)) {
      // tolerate a single header line
      if (tb.radii.empty()) continue;
      throw std::invalid_argument("load_table_csv: malformed row '" + line + "'");
    }
    tb.radii.push_back(r);
    tb.values.push_back(f);
  }
  return tb;
}

MinimalSphereReport check_no_minimal_sphere(const MetricProfile& profile,
                                            double f_cap) {
  profile.validate();
  MinimalSphereReport rep;
  rep.max_f = -std::numeric_limits<double>::infinity();
  rep.min_mean_curvature = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (profile.f[i] > rep.max_f) {
      rep.max_f = profile.f[i];
      rep.max_f_node = i;
      rep.max_f_radius = profile.r(i);
    }
    if (i > 0) {
      const double h = 1.0 / (profile.r(i) * profile.f[i]);
      if (h < rep.min_mean_curvature) {
        rep.min_mean_curvature = h;
        rep.min_mean_curvature_radius = profile.r(i);
      }
    }
  }
  rep.no_minimal_sphere = rep.max_f <= f_cap;
  return rep;
}

AfClassReport check_af_class(const MetricProfile& profile, int k, double delta,
                             double fit_tolerance) {
  if (k < 0 || k > 2)
    throw std::invalid_argument("check_af_class: k must lie in {0, 1, 2}");
  profile.validate();

  AfClassReport rep;
  rep.certified_k = k;
  rep.note = "norms above k = 2 are not certifiable from grid samples";

  RadialFunction wfun{profile.grid, profile.w()};
  const auto norm = weighted_norm(wfun, NormSpec{k, 2.0, delta}, profile.dimension);
  rep.norm_value = norm.value;
  rep.norm_tail_error = norm.tail_error;

  // least-squares fit of log|w| against log r over the outer third
  const std::size_t n = profile.size();
  const std::size_t start = n - n / 3;
  double wmax = 0.0;
  for (std::size_t i = start; i < n; ++i)
    wmax = std::max(wmax, std::abs(profile.f[i] * profile.f[i] - 1.0));
  if (wmax < 1e-13) {
    rep.degenerate_tail = true;
    rep.pass = true;
    rep.tail_exponent = -std::numeric_limits<double>::infinity();
    rep.note = "flat tail, trivially pass";
    return rep;
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t i = start; i < n; ++i) {
    const double w = std::abs(profile.f[i] * profile.f[i] - 1.0);
    if (w < 1e-300) continue;
    const double x = std::log(profile.r(i)), y = std::log(w);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++count;
  }
  if (count < 3) {
    rep.degenerate_tail = true;
    rep.pass = true;
    rep.tail_exponent = -std::numeric_limits<double>::infinity();
    rep.note = "flat tail, trivially pass";
    return rep;
  }
  const double denom = count * sxx - sx * sx;
  rep.tail_exponent = (count * sxy - sx * sy) / denom;
  rep.pass = rep.tail_exponent <= delta + fit_tolerance;
  return rep;
}

}  // namespace ricci
