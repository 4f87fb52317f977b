// Copyright 2026 The fwlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fwlab/sobolev.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "fwlab/kernels.hpp"
#include "fwlab/parallel.hpp"

namespace fwlab {

namespace {

static_assert(std::endian::native == std::endian::little,
              "grid binary I/O assumes a little-endian host");

using cplx = std::complex<double>;

// FFTW planning is not thread-safe; execution with new-array execute is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(const std::vector<int>& dims, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(dims, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::size_t total = 1;
    for (int n : dims) total *= static_cast<std::size_t>(n);
    std::vector<cplx> scratch(total);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), p, p, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan) throw NumericalError("FFTW planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mu_;
  std::map<std::pair<std::vector<int>, int>, fftw_plan> plans_;
};

std::vector<int> dims_of(const Box& box) {
  std::vector<int> dims;
  for (const auto& ax : box.axes) dims.push_back(static_cast<int>(ax.n));
  return dims;
}

void transform(const Box& box, std::vector<cplx>& data, int sign) {
  fftw_plan plan = PlanCache::instance().get(dims_of(box), sign);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

std::vector<cplx> forward(const GridFunction& f) {
  std::vector<cplx> z(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) z[i] = f[i];
  transform(f.box(), z, FFTW_FORWARD);
  return z;
}

GridFunction backward_real(const Box& box, std::vector<cplx>& z) {
  transform(box, z, FFTW_BACKWARD);
  const double inv = 1.0 / static_cast<double>(z.size());
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i].real() * inv;
  return {box, std::move(out)};
}

// Signed integer mode of FFT index i on an axis of n nodes.
inline long mode_of(std::size_t i, std::size_t n) {
  return i < n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
}

// Calls fn(flat, xi) for every spectral index.
template <class Fn>
void for_each_frequency(const Box& box, Fn&& fn) {
  const int d = box.dim();
  std::vector<double> xi(d);
  std::vector<std::size_t> idx(d, 0);
  const std::size_t total = box.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (int a = 0; a < d; ++a)
      xi[a] = 2.0 * std::numbers::pi * static_cast<double>(mode_of(idx[a], box.axes[a].n)) /
              box.axes[a].length;
    fn(flat, xi.data(), idx.data());
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < box.axes[a].n) break;
      idx[a] = 0;
    }
  }
}

void require_same_box(const GridFunction& a, const GridFunction& b, const char* where) {
  if (!(a.box() == b.box())) throw InputError(std::string(where) + ": grid boxes differ");
}

}  // namespace

Box Box::cube(int d, double origin, double length, std::size_t n) {
  Box b;
  b.axes.assign(d, GridAxis{origin, length, n});
  b.validate();
  return b;
}

std::size_t Box::size() const {
  std::size_t s = 1;
  for (const auto& ax : axes) s *= ax.n;
  return s;
}

double Box::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= spacing(a);
  return v;
}

void Box::validate() const {
  require(!axes.empty(), "grid box: dimension must be positive");
  for (const auto& ax : axes) {
    require(ax.n >= 2 && std::has_single_bit(ax.n), "grid box: node count must be a power of two");
    require(ax.length > 0.0 && std::isfinite(ax.length), "grid box: length must be > 0");
    require(std::isfinite(ax.origin), "grid box: origin must be finite");
  }
}

bool Box::operator==(const Box& other) const {
  if (axes.size() != other.axes.size()) return false;
  for (std::size_t a = 0; a < axes.size(); ++a)
    if (axes[a].n != other.axes[a].n || axes[a].origin != other.axes[a].origin ||
        axes[a].length != other.axes[a].length)
      return false;
  return true;
}

GridFunction::GridFunction(Box box) : box_(std::move(box)) {
  box_.validate();
  values_.assign(box_.size(), 0.0);
}

GridFunction::GridFunction(Box box, std::vector<double> values)
    : box_(std::move(box)), values_(std::move(values)) {
  box_.validate();
  require(values_.size() == box_.size(), "GridFunction: value count does not match box");
  for (double v : values_) require(std::isfinite(v), "GridFunction: non-finite value");
}

GridFunction GridFunction::sample(const Box& box, const std::function<double(const Vec&)>& f) {
  GridFunction g(box);
  for (std::size_t i = 0; i < g.size(); ++i) g.values_[i] = f(g.node(i));
  return g;
}

GridFunction GridFunction::constant(const Box& box, double c) {
  GridFunction g(box);
  std::fill(g.values_.begin(), g.values_.end(), c);
  return g;
}

Vec GridFunction::node(std::size_t flat) const {
  const int d = dim();
  Vec x(d);
  for (int a = d - 1; a >= 0; --a) {
    const std::size_t n = box_.axes[a].n;
    x[a] = box_.axes[a].origin + static_cast<double>(flat % n) * box_.spacing(a);
    flat /= n;
  }
  return x;
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  require_same_box(*this, o, "grid +");
  kernels::axpy(1.0, o.values_, values_);
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  require_same_box(*this, o, "grid -");
  kernels::axpy(-1.0, o.values_, values_);
  return *this;
}

GridFunction& GridFunction::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

GridFunction operator*(const GridFunction& a, const GridFunction& b) {
  require_same_box(a, b, "grid *");
  GridFunction out(a.box());
  for (std::size_t i = 0; i < a.size(); ++i) out.values_[i] = a.values_[i] * b.values_[i];
  return out;
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

GridFunction apply_multiplier(const GridFunction& f,
                              const std::function<double(const double* xi)>& m) {
  std::vector<cplx> z = forward(f);
  std::vector<double> mult(z.size());
  for_each_frequency(f.box(), [&](std::size_t flat, const double* xi, const std::size_t*) {
    mult[flat] = m(xi);
  });
  kernels::scale_complex(std::span<double>(reinterpret_cast<double*>(z.data()), 2 * z.size()),
                         mult);
  return backward_real(f.box(), z);
}

GridFunction bessel_potential(const GridFunction& f, double s) {
  if (s == 0.0) return f;
  const int d = f.dim();
  return apply_multiplier(f, [d, s](const double* xi) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += xi[a] * xi[a];
    return std::pow(1.0 + r2, 0.5 * s);
  });
}

GridFunction derivative(const GridFunction& f, int axis) {
  require(axis >= 0 && axis < f.dim(), "derivative: axis out of range");
  std::vector<cplx> z = forward(f);
  const std::size_t n = f.box().axes[axis].n;
  for_each_frequency(f.box(), [&](std::size_t flat, const double* xi, const std::size_t* idx) {
    z[flat] = idx[axis] == n / 2 ? cplx(0.0) : z[flat] * cplx(0.0, xi[axis]);
  });
  return backward_real(f.box(), z);
}

GridFunction laplacian(const GridFunction& f) {
  const int d = f.dim();
  return apply_multiplier(f, [d](const double* xi) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += xi[a] * xi[a];
    return -r2;
  });
}

double sobolev_norm_sq(const GridFunction& f, double s) {
  const std::vector<cplx> z = forward(f);
  const int d = f.dim();
  std::vector<double> w(z.size()), re(z.size()), im(z.size());
  for_each_frequency(f.box(), [&](std::size_t flat, const double* xi, const std::size_t*) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += xi[a] * xi[a];
    w[flat] = s == 0.0 ? 1.0 : std::pow(1.0 + r2, s);
    re[flat] = z[flat].real();
    im[flat] = z[flat].imag();
  });
  return f.box().cell_volume() / static_cast<double>(z.size()) *
         kernels::weighted_norm_sq(w, re, im);
}

SobolevNorm sobolev_norm(const GridFunction& f, double s) {
  return {s, std::sqrt(sobolev_norm_sq(f, s))};
}

double inner(const GridFunction& f, const GridFunction& g) {
  require_same_box(f, g, "inner");
  return f.box().cell_volume() * kernels::dot(f.values(), g.values());
}

GridFunction mollify(const SignedAtomicMeasure& eta, double eps, const Box& box) {
  box.validate();
  require(eps > 0.0, "mollify: eps must be > 0");
  require(eta.dim() == box.dim(), "mollify: dimension mismatch");
  const int d = box.dim();
  for (std::size_t i = 0; i < eta.size(); ++i) {
    for (int a = 0; a < d; ++a) {
      const double x = eta.location(i)[a];
      const auto& ax = box.axes[a];
      if (x - ax.origin < 6.0 * eps || ax.origin + ax.length - x < 6.0 * eps) {
        std::ostringstream os;
        os << "mollify: atom " << i << " lies within 6 eps of the box boundary on axis " << a;
        throw InputError(os.str());
      }
    }
  }
  GridFunction out(box);
  const double norm = std::pow(2.0 * std::numbers::pi * eps * eps, -0.5 * d);
  std::vector<std::vector<double>> factor(d);
  for (std::size_t i = 0; i < eta.size(); ++i) {
    for (int a = 0; a < d; ++a) {
      const auto& ax = box.axes[a];
      factor[a].assign(ax.n, 0.0);
      for (std::size_t j = 0; j < ax.n; ++j) {
        const double y = ax.origin + static_cast<double>(j) * box.spacing(a) - eta.location(i)[a];
        double g = 0.0;
        for (int img = -1; img <= 1; ++img) {
          const double z = (y + img * ax.length) / eps;
          g += std::exp(-0.5 * z * z);
        }
        factor[a][j] = g;
      }
    }
    auto& vals = out.values();
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t flat = 0; flat < vals.size(); ++flat) {
      double p = eta.weight(i) * norm;
      for (int a = 0; a < d; ++a) p *= factor[a][idx[a]];
      vals[flat] += p;
      for (int a = d - 1; a >= 0; --a) {
        if (++idx[a] < box.axes[a].n) break;
        idx[a] = 0;
      }
    }
  }
  return out;
}

int band_limit(const Box& box) {
  std::size_t n = box.axes.front().n;
  for (const auto& ax : box.axes) n = std::min(n, ax.n);
  return static_cast<int>((n / 2 - 1) / 2);
}

GridFunction random_band_limited(const Box& box, CounterRng& rng, int max_mode, double decay) {
  box.validate();
  require(max_mode >= 0, "random_band_limited: max_mode must be >= 0");
  for (const auto& ax : box.axes)
    require(2 * max_mode < static_cast<int>(ax.n), "random_band_limited: max_mode exceeds grid");
  const int d = box.dim();
  std::vector<cplx> z(box.size(), cplx(0.0));
  // Draw in a resolution-independent mode order so that refining the grid
  // samples the same trigonometric polynomial.
  std::vector<int> m(d, -max_mode);
  while (true) {
    double r2 = 0.0;
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) {
      r2 += static_cast<double>(m[a]) * m[a];
      const auto n = static_cast<long>(box.axes[a].n);
      flat = flat * box.axes[a].n + static_cast<std::size_t>((m[a] + n) % n);
    }
    const double amp = std::pow(1.0 + std::sqrt(r2), -decay);
    const double re = rng.normal(), im = rng.normal();
    z[flat] = amp * cplx(re, im);
    int a = d - 1;
    for (; a >= 0; --a) {
      if (++m[a] <= max_mode) break;
      m[a] = -max_mode;
    }
    if (a < 0) break;
  }
  // Unnormalized inverse transform evaluates sum_m z_m exp(i xi_m (x - origin)).
  transform(box, z, FFTW_BACKWARD);
  std::vector<double> vals(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) vals[i] = z[i].real();
  return {box, std::move(vals)};
}

double multiplication_ratio(const GridFunction& u, const GridFunction& v, double s1, double s2,
                            double s) {
  require_same_box(u, v, "multiplication_ratio");
  const double d = u.dim();
  auto need = [](bool ok, const char* what) {
    if (!ok) throw InputError(std::string("multiplication_ratio: violated ") + what);
  };
  need(s < 0.0, "s < 0");
  need(s1 >= s, "s1 >= s");
  need(s2 >= s, "s2 >= s");
  need(std::min(s1, s2) < 0.0, "min(s1, s2) < 0");
  need(s1 + s2 - s > d / 2.0, "s1 + s2 - s > d/2");
  need(s1 + s2 >= 0.0, "s1 + s2 >= 0");
  const double num = sobolev_norm(u * v, s).value;
  if (num == 0.0) return 0.0;
  return num / (sobolev_norm(u, s1).value * sobolev_norm(v, s2).value);
}

CheckReport leibniz_identity_check(const GridFunction& f, const GridFunction& h, int k,
                                   double tol) {
  require(k == 1, "leibniz_identity_check: only k = 1 is implemented");
  require_same_box(f, h, "leibniz_identity_check");
  CheckReport rep{"leibniz", true, 0.0, tol, ""};
  const GridFunction fh = f * h;
  const GridFunction lhs = fh - laplacian(fh);
  GridFunction rhs = f * (h - laplacian(h)) - laplacian(f) * h;
  for (int a = 0; a < f.dim(); ++a) rhs -= 2.0 * (derivative(f, a) * derivative(h, a));
  rep.worst = (lhs - rhs).max_abs();
  if (rep.worst > tol) {
    std::ostringstream os;
    os << "max residual " << rep.worst << " > " << tol;
    rep.fail(os.str());
  }
  return rep;
}

CommutatorResult commutator_residual(const GridFunction& f, const GridFunction& g, int k) {
  require(k >= 1, "commutator_residual: k must be >= 1");
  require_same_box(f, g, "commutator_residual");
  const double d = f.dim();
  const GridFunction diff =
      bessel_potential(f * g, -2.0 * k) - f * bessel_potential(g, -2.0 * k);
  CommutatorResult r;
  r.residual = inner(diff, diff);
  r.bound = sobolev_norm_sq(f, 2.0 * k + d / 2.0 + 1.0) * sobolev_norm_sq(g, -2.0 * k - 0.5);
  return r;
}

void DiffusionField::validate() const {
  const int d = dim();
  require(d >= 1, "diffusion field: empty drift");
  require(static_cast<int>(a.size()) == d * d, "diffusion field: a must have d*d components");
  for (const auto& c : a) require(c.box() == b.front().box(), "diffusion field: boxes differ");
  for (const auto& c : b) require(c.box() == b.front().box(), "diffusion field: boxes differ");
}

double DiffusionField::ellipticity() const {
  validate();
  const int d = dim();
  double lo = std::numeric_limits<double>::infinity();
  Mat m(d, d);
  for (std::size_t i = 0; i < b.front().size(); ++i) {
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q) m(p, q) = 0.5 * (a[p * d + q][i] + a[q * d + p][i]);
    lo = std::min(lo, d == 1 ? m(0, 0) : Eigen::SelfAdjointEigenSolver<Mat>(m).eigenvalues()[0]);
  }
  return lo;
}

namespace {

double dissipation_lhs(const GridFunction& eta_eps, const DiffusionField& field, int lambda) {
  const int d = field.dim();
  const GridFunction f = bessel_potential(eta_eps, -2.0 * lambda);
  GridFunction gen(f.box());
  std::vector<GridFunction> df;
  for (int p = 0; p < d; ++p) df.push_back(derivative(f, p));
  for (int p = 0; p < d; ++p) {
    gen += field.b[p] * df[p];
    for (int q = 0; q < d; ++q) gen += 0.5 * (field.a[p * d + q] * derivative(df[p], q));
  }
  return inner(gen, eta_eps);
}

}  // namespace

DissipationResult dissipation_check(const SignedAtomicMeasure& eta, const DiffusionField& field,
                                    int lambda, double delta, double eps_moll) {
  field.validate();
  require(lambda >= 1, "dissipation_check: lambda must be positive");
  require(delta > 0.0, "dissipation_check: delta must be > 0");
  const double ell = field.ellipticity();
  if (ell < delta) {
    std::ostringstream os;
    os << "dissipation_check: ellipticity " << ell << " below delta " << delta;
    throw InputError(os.str());
  }
  const Box& box = field.b.front().box();
  const GridFunction eta_eps = mollify(eta, eps_moll, box);
  DissipationResult r;
  r.lhs = dissipation_lhs(eta_eps, field, lambda);
  r.norm_1ml_sq = sobolev_norm_sq(eta_eps, 1.0 - lambda);
  r.norm_ml_sq = sobolev_norm_sq(eta_eps, -static_cast<double>(lambda));
  r.mollification_error =
      r.norm_ml_sq - sobolev_norm_sq(mollify(eta, 0.5 * eps_moll, box), -static_cast<double>(lambda));
  return r;
}

void write_grid(const GridFunction& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  put_u64(static_cast<std::uint64_t>(f.dim()));
  for (const auto& ax : f.box().axes) {
    put_u64(ax.n);
    put_f64(ax.origin);
    put_f64(ax.length);
  }
  out.write(reinterpret_cast<const char*>(f.values().data()),
            static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!out) throw NumericalError("short write to '" + path + "'");
}

GridFunction read_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  auto get_u64 = [&] {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  auto get_f64 = [&] {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  const std::uint64_t d = get_u64();
  require(in && d >= 1 && d <= 8, "read_grid: bad header in '" + path + "'");
  Box box;
  for (std::uint64_t a = 0; a < d; ++a) {
    GridAxis ax;
    ax.n = get_u64();
    ax.origin = get_f64();
    ax.length = get_f64();
    box.axes.push_back(ax);
  }
  require(static_cast<bool>(in), "read_grid: truncated header in '" + path + "'");
  box.validate();
  std::vector<double> vals(box.size());
  in.read(reinterpret_cast<char*>(vals.data()),
          static_cast<std::streamsize>(vals.size() * sizeof(double)));
  require(static_cast<bool>(in), "read_grid: truncated payload in '" + path + "'");
  return {box, std::move(vals)};
}

nlohmann::json grid_sidecar(const GridFunction& f, const std::string& payload_name) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& ax : f.box().axes)
    axes.push_back({{"n", ax.n}, {"origin", ax.origin}, {"length", ax.length}});
  const std::string_view bytes(reinterpret_cast<const char*>(f.values().data()),
                               f.size() * sizeof(double));
  std::ostringstream hash;
  hash << std::hex << fnv1a64(bytes);
  return {{"format", "fwlab-grid/1"},
          {"dim", f.dim()},
          {"axes", axes},
          {"payload", payload_name},
          {"payload_fnv1a64", hash.str()},
          {"byte_order", "little"}};
}

}  // namespace fwlab
