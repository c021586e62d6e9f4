//==============================================================================
// radiation.cpp
//==============================================================================

#include "halfwave/radiation.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "halfwave/errors.hpp"

namespace hw {

namespace {

double factorial(int n) {
  double r = 1;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

cplx at_origin(const Field& f) { return f.v[f.grid->origin_index()]; }

std::vector<cplx> unpack(const Eigen::VectorXd& x) {
  std::vector<cplx> d(x.size() / 2);
  for (size_t j = 0; j < d.size(); ++j) d[j] = cplx(x[2 * j], x[2 * j + 1]);
  return d;
}

Eigen::VectorXd real_residual(const Field& base, int m, const Eigen::VectorXd& x) {
  std::vector<cplx> f = degeneracy_functional(base, m, unpack(x));
  Eigen::VectorXd r(2 * f.size());
  for (size_t k = 0; k < f.size(); ++k) {
    r[2 * k] = f[k].real();
    r[2 * k + 1] = f[k].imag();
  }
  return r;
}

double max_abs(const std::vector<cplx>& v) {
  double r = 0;
  for (const cplx& c : v) r = std::max(r, std::abs(c));
  return r;
}

double fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(t.size());
  for (int k = 0; k < n; ++k) {
    const double lx = std::log(std::abs(t[k])), ly = std::log(std::max(y[k], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

bool lex_less(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  for (size_t j = 0; j < a.size(); ++j) {
    if (a[j].real() != b[j].real()) return a[j].real() < b[j].real();
    if (a[j].imag() != b[j].imag()) return a[j].imag() < b[j].imag();
  }
  return false;
}

}  // namespace

//------------------------------------------------------------------------------
// Base bump and realization
//------------------------------------------------------------------------------
Field gaussian(const GridPtr& grid, double amplitude, double width, double center) {
  if (!(width > 0)) throw Error(ErrorKind::InvalidArgument, "bump width must be positive", width);
  return Field::from_function(grid, [=](double x) {
    const double y = x - center;
    return cplx(amplitude * std::exp(-y * y / (2 * width * width)), 0);
  });
}

Field base_bump(const GridPtr& grid, int m, double q_l2, double width, double fraction, double center) {
  if (!(q_l2 > 0)) throw Error(ErrorKind::InvalidArgument, "base_bump needs ||Q||_{L2} > 0", q_l2);
  const double h = sobolev_norm(gaussian(grid, 1.0, width, center), m + 2, false);
  return gaussian(grid, fraction * q_l2 / h, width, center);
}

Field realize(const Field& base_f, const std::vector<cplx>& coeffs) {
  const rvec& xi = base_f.grid->freqs();
  const int n = base_f.grid->n();
  // modes where the base spectrum sits at the FFT roundoff floor are dropped:
  // the polynomial symbol would amplify that noise by |xi|^N
  const cvec fh = base_f.grid->fft(base_f.v);
  const double floor = 1e-15 * fh.cwiseAbs().maxCoeff();
  cvec sym = cvec::Zero(xi.size());
  for (int k = 0; k < xi.size(); ++k) {
    if (std::abs(k < n / 2 ? k : k - n) > n / 3) continue;
    if (std::abs(fh[k]) <= floor) continue;
    cplx p = 0;
    for (int j = static_cast<int>(coeffs.size()); j >= 1; --j) p = (p + coeffs[j - 1]) * xi[k];
    sym[k] = p;
  }
  return apply_symbol(base_f, sym);
}

Field realize(const RadiationSpec& spec) { return realize(spec.base_f, spec.coeffs); }

//------------------------------------------------------------------------------
// Degeneracy functional
//------------------------------------------------------------------------------
int degeneracy_condition_count(int m) { return (m + 1) * (m + 2) / 2 + m * (m + 1) / 2; }

std::vector<std::string> degeneracy_labels(int m) {
  std::vector<std::string> out;
  for (int tot = 0; tot <= m; ++tot)
    for (int k2 = 0; k2 <= tot; ++k2)
      out.push_back("dx^" + std::to_string(tot - k2) + " dt^" + std::to_string(k2) + " z");
  for (int tot = 0; tot <= m - 1; ++tot)
    for (int k4 = 0; k4 <= tot; ++k4)
      out.push_back("dx^" + std::to_string(tot - k4) + " dt^" + std::to_string(k4) + " Dz");
  return out;
}

std::vector<Field> time_derivatives(const Field& z, int order) {
  std::vector<Field> zt{z};
  for (int k = 0; k < order; ++k) {
    Field cubic(z.grid);
    for (int a = 0; a <= k; ++a)
      for (int b = 0; a + b <= k; ++b) {
        const int c = k - a - b;
        const double w = factorial(k) / (factorial(a) * factorial(b) * factorial(c));
        cubic.v.array() += w * zt[a].v.array() * zt[b].v.array() * zt[c].v.array().conjugate();
      }
    cubic = dealias(cubic);
    Field next = frac_d(zt[k]) - cubic;
    next *= cplx(0, -1);
    zt.push_back(std::move(next));
  }
  return zt;
}

std::vector<cplx> degeneracy_functional(const Field& base_f, int m, const std::vector<cplx>& coeffs) {
  if (m < 0 || m > 2) throw Error(ErrorKind::UnsupportedOrder, "degeneracy order must be 0, 1 or 2", m);
  Field z = realize(base_f, coeffs);
  std::vector<Field> zt = time_derivatives(z, m);
  std::vector<cplx> out;
  for (int tot = 0; tot <= m; ++tot)
    for (int k2 = 0; k2 <= tot; ++k2) {
      const int k1 = tot - k2;
      out.push_back(at_origin(k1 ? derivative(zt[k2], k1) : zt[k2]));
    }
  for (int tot = 0; tot <= m - 1; ++tot)
    for (int k4 = 0; k4 <= tot; ++k4) {
      const int k3 = tot - k4;
      Field dz = frac_d(zt[k4]);
      out.push_back(at_origin(k3 ? derivative(dz, k3) : dz));
    }
  return out;
}

std::vector<cplx> degeneracy_functional(const RadiationSpec& spec) {
  return degeneracy_functional(spec.base_f, spec.m, spec.coeffs);
}

cplx origin_value_quadrature(const RadiationSpec& spec) {
  using boost::math::quadrature::gauss_kronrod;
  const double a = spec.amplitude, w = spec.width, c = spec.center;
  const double cut = 40.0 / w;
  auto part = [&](bool imag) {
    auto integrand = [&](double xi) {
      cplx p = 0;
      for (int j = static_cast<int>(spec.coeffs.size()); j >= 1; --j) p = (p + spec.coeffs[j - 1]) * xi;
      const cplx fh = a * w * std::sqrt(2 * M_PI) * std::exp(-0.5 * w * w * xi * xi) * std::polar(1.0, -xi * c);
      const cplx v = fh * p;
      return imag ? v.imag() : v.real();
    };
    return gauss_kronrod<double, 31>::integrate(integrand, -cut, cut, 15, 1e-14) / (2 * M_PI);
  };
  return {part(false), part(true)};
}

//------------------------------------------------------------------------------
// Root search
//------------------------------------------------------------------------------
std::vector<cplx> phase_normalize(const std::vector<cplx>& d) {
  std::vector<cplx> out = d;
  for (const cplx& c : d)
    if (std::abs(c) > 1e-8) {
      const cplx rot = std::conj(c) / std::abs(c);
      for (cplx& o : out) o *= rot;
      break;
    }
  return out;
}

RadiationSpec solve_coefficients(const GridPtr& grid, int m, int n_coeffs, const RadiationOptions& opt) {
  double fraction = opt.h_fraction;
  for (int attempt = 0; attempt < 8; ++attempt, fraction *= 0.5) {
    Field base = base_bump(grid, m, opt.q_l2, opt.width, fraction, opt.center);
    RadiationSpec s = solve_coefficients(base, m, n_coeffs, opt);
    // radiation must stay mass-subcritical
    if (norm_l2(realize(s)) < opt.q_l2 / std::sqrt(2.0)) return s;
  }
  throw Error(ErrorKind::SearchFailure, "could not make the radiation mass-subcritical");
}

RadiationSpec solve_coefficients(const Field& base_f, int m, int n_coeffs, const RadiationOptions& opt) {
  if (m < 0 || m > 2) throw Error(ErrorKind::UnsupportedOrder, "degeneracy order must be 0, 1 or 2", m);
  const int conditions = 2 * degeneracy_condition_count(m);
  if (!(2 * n_coeffs - 1 > conditions))
    throw Error(ErrorKind::InvalidArgument,
                "need 2 N - 1 > " + std::to_string(conditions) + " real conditions", n_coeffs);
  if (opt.restarts < 1) throw Error(ErrorKind::InvalidArgument, "restarts must be >= 1", opt.restarts);

  const int nx = 2 * n_coeffs;
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double fd = 1e-6;

  RadiationSpec best;
  best.base_f = base_f;
  best.width = opt.width;
  best.center = opt.center;
  {
    const double ref = std::abs(gaussian(base_f.grid, 1.0, opt.width, opt.center).v[base_f.grid->origin_index()]);
    best.amplitude = std::abs(at_origin(base_f)) / ref;
  }
  best.m = m;
  best.n_coeffs = n_coeffs;
  best.residual = std::numeric_limits<double>::infinity();
  double best_seen = best.residual;

  for (int r = 0; r < opt.restarts; ++r) {
    Eigen::VectorXd x(nx);
    for (int j = 0; j < nx; ++j) x[j] = gauss(rng);
    x.normalize();
    Eigen::VectorXd f = real_residual(base_f, m, x);
    for (int it = 0; it < opt.max_iter && f.lpNorm<Eigen::Infinity>() > opt.tol; ++it) {
      Eigen::MatrixXd a(f.size() + 1, nx);
      for (int j = 0; j < nx; ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += fd;
        xm[j] -= fd;
        a.block(0, j, f.size(), 1) = (real_residual(base_f, m, xp) - real_residual(base_f, m, xm)) / (2 * fd);
      }
      a.row(f.size()) = 2 * x.transpose();
      Eigen::VectorXd rhs(f.size() + 1);
      rhs.head(f.size()) = -f;
      rhs[f.size()] = 1.0 - x.squaredNorm();
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
      cod.setThreshold(1e-11);
      Eigen::VectorXd step = cod.solve(rhs);
      // damped update, renormalized onto the sphere
      double tau = 1.0;
      Eigen::VectorXd xn, fn;
      for (int ls = 0; ls < 20; ++ls, tau *= 0.5) {
        xn = (x + tau * step).normalized();
        fn = real_residual(base_f, m, xn);
        if (fn.norm() < f.norm()) break;
      }
      x = xn;
      f = fn;
    }
    const double res = f.lpNorm<Eigen::Infinity>();
    best_seen = std::min(best_seen, res);
    if (res > opt.tol) continue;
    ++best.roots_found;
    std::vector<cplx> d = phase_normalize(unpack(x));
    const double res_n = max_abs(degeneracy_functional(base_f, m, d));
    const bool tie = std::abs(res_n - best.residual) <= 1e-13;
    if ((!tie && res_n < best.residual) || (tie && lex_less(d, best.coeffs))) {
      best.coeffs = d;
      best.residual = res_n;
    }
  }
  best.restarts_tried = opt.restarts;
  if (best.coeffs.empty())
    throw Error(ErrorKind::SearchFailure,
                "no root found in " + std::to_string(opt.restarts) + " restarts; try a larger N",
                best_seen);
  return best;
}

//------------------------------------------------------------------------------
// Degeneracy of the evolved flow
//------------------------------------------------------------------------------
DegeneracyReport verify_degeneracy_in_time(const RadiationSpec& spec, const EvolverConfig& cfg,
                                           double t_min, double t_max, int n_samples, double t_norm) {
  if (!(t_min > 0 && t_max > t_min) || n_samples < 2)
    throw Error(ErrorKind::InvalidArgument, "need 0 < t_min < t_max and >= 2 samples");
  DegeneracyReport rep;
  rep.m = spec.m;
  const Field z0 = realize(spec);
  EvolverConfig c = cfg;
  c.monitor_stride = 1 << 20;

  std::vector<double> mags(n_samples);
  for (int k = 0; k < n_samples; ++k)
    mags[k] = t_min * std::pow(t_max / t_min, double(k) / (n_samples - 1));

  auto sample = [&](const Field& z, double t) {
    rep.t.push_back(t);
    rep.z0.push_back(std::abs(at_origin(z)));
    rep.grad0.push_back(std::abs(at_origin(derivative(z))));
    rep.dz0.push_back(std::abs(at_origin(frac_d(z))));
  };
  for (int sgn : {-1, 1}) {
    Field z = z0;
    double t = 0;
    for (double mag : mags) {
      const double step = mag - t;
      z = sgn > 0 ? evolve(z, step, c).u : evolve_backward(z, -step, c).u;
      t = mag;
      sample(z, sgn * mag);
    }
  }
  rep.slope_z = fit_slope(rep.t, rep.z0);
  rep.slope_grad = fit_slope(rep.t, rep.grad0);
  rep.slope_dz = fit_slope(rep.t, rep.dz0);
  rep.slopes_ok = rep.slope_z >= spec.m + 0.7 && (spec.m == 0 || rep.slope_grad >= spec.m - 0.3);

  const double h0 = sobolev_norm(z0, 0.5, false), top0 = sobolev_norm(z0, spec.m + 1, false);
  rep.h_half_min_ratio = rep.h_half_max_ratio = rep.h_top_max_ratio = 1.0;
  const int n_norm = 10;
  for (int sgn : {-1, 1}) {
    Field z = z0;
    for (int k = 1; k <= n_norm; ++k) {
      const double dt = t_norm / n_norm;
      z = sgn > 0 ? evolve(z, dt, c).u : evolve_backward(z, -dt, c).u;
      const double hh = sobolev_norm(z, 0.5, false), ht = sobolev_norm(z, spec.m + 1, false);
      rep.norm_t.push_back(sgn * k * dt);
      rep.h_half.push_back(hh);
      rep.h_top.push_back(ht);
      rep.h_half_min_ratio = std::min(rep.h_half_min_ratio, hh / h0);
      rep.h_half_max_ratio = std::max(rep.h_half_max_ratio, hh / h0);
      rep.h_top_max_ratio = std::max(rep.h_top_max_ratio, ht / top0);
    }
  }
  rep.bounds_ok = rep.h_half_min_ratio >= 0.5 && rep.h_half_max_ratio <= 2.0 && rep.h_top_max_ratio <= 2.0;
  rep.ok = rep.slopes_ok && rep.bounds_ok;
  return rep;
}

//------------------------------------------------------------------------------
// Persistence
//------------------------------------------------------------------------------
json radiation_to_json(const RadiationSpec& spec) {
  json c = json::array();
  for (const cplx& d : spec.coeffs) c.push_back({d.real(), d.imag()});
  return {{"m", spec.m},
          {"n_coeffs", spec.n_coeffs},
          {"coeffs", c},
          {"residual", spec.residual},
          {"base", {{"kind", "gaussian"}, {"amplitude", spec.amplitude}, {"width", spec.width}, {"center", spec.center}}},
          {"grid", {{"n", spec.base_f.grid->n()}, {"length", spec.base_f.grid->length()}}},
          {"restarts_tried", spec.restarts_tried},
          {"roots_found", spec.roots_found}};
}

RadiationSpec radiation_from_json(const json& j, const GridPtr& grid) {
  RadiationSpec s;
  s.m = j.at("m");
  s.n_coeffs = j.at("n_coeffs");
  for (const auto& c : j.at("coeffs")) s.coeffs.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
  s.residual = j.at("residual");
  s.amplitude = j.at("base").at("amplitude");
  s.width = j.at("base").at("width");
  s.center = j.at("base").value("center", 0.0);
  s.restarts_tried = j.value("restarts_tried", 0);
  s.roots_found = j.value("roots_found", 0);
  GridPtr g = grid;
  if (!g || g->n() != j.at("grid").at("n").get<int>() || g->length() != j.at("grid").at("length").get<double>())
    g = Grid::make(j.at("grid").at("n"), j.at("grid").at("length"));
  s.base_f = gaussian(g, s.amplitude, s.width, s.center);
  return s;
}

json degeneracy_report_to_json(const DegeneracyReport& r) {
  return {{"m", r.m},           {"t", r.t},
          {"z0", r.z0},         {"grad0", r.grad0},
          {"dz0", r.dz0},       {"slope_z", r.slope_z},
          {"slope_grad", r.slope_grad}, {"slope_dz", r.slope_dz},
          {"norm_t", r.norm_t}, {"h_half", r.h_half},
          {"h_top", r.h_top},   {"h_half_min_ratio", r.h_half_min_ratio},
          {"h_half_max_ratio", r.h_half_max_ratio}, {"h_top_max_ratio", r.h_top_max_ratio},
          {"slopes_ok", r.slopes_ok}, {"bounds_ok", r.bounds_ok},
          {"ok", r.ok}};
}

void save_radiation(const std::string& dir, const RadiationSpec& spec) {
  std::filesystem::create_directories(dir);
  write_json(dir + "/radiation.json", radiation_to_json(spec));
  write_field(dir + "/zstar.hwf", realize(spec), {{"kind", "radiation"}, {"m", spec.m}});
}

RadiationSpec load_radiation(const std::string& dir) {
  return radiation_from_json(read_json(dir + "/radiation.json"), nullptr);
}

}  // namespace hw
