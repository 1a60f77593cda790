#include "cnsr/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cnsr/spectral.hpp"

namespace cnsr {

namespace {

double clip0(double v) { return v > 0.0 ? v : 0.0; }

double grad_sq_integral(const VectorField& g) { return g.l2_squared(); }

void require_uniform(const std::vector<LedgerRow>& rows, const char* who) {
  if (rows.size() < 3) throw std::invalid_argument(std::string(who) + ": need at least 3 rows");
  const double dt0 = rows[1].t - rows[0].t;
  if (!(dt0 > 0.0)) throw std::invalid_argument(std::string(who) + ": times must increase");
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    const double dt = rows[k + 1].t - rows[k].t;
    if (std::abs(dt - dt0) > 1e-9 * dt0) throw std::invalid_argument(std::string(who) + ": rows are not uniformly spaced");
  }
}

void require_matching(const std::vector<LedgerRow>& rows, const std::vector<ForcingSample>& f, const char* who) {
  if (f.size() != rows.size()) throw std::invalid_argument(std::string(who) + ": forcing series length differs");
  for (std::size_t k = 0; k < rows.size(); ++k)
    if (std::abs(f[k].t - rows[k].t) > 1e-12 * std::max(1.0, std::abs(rows[k].t)))
      throw std::invalid_argument(std::string(who) + ": forcing times do not match the rows");
}

ResidualSeries finish(ResidualSeries r) {
  for (double v : r.values) r.max_abs = std::max(r.max_abs, std::abs(v));
  return r;
}

double least_squares_slope(const std::vector<double>& t, const std::vector<double>& y, std::size_t lo, std::size_t hi) {
  const double n = static_cast<double>(hi - lo);
  double st = 0, sy = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    st += t[i];
    sy += y[i];
  }
  const double mt = st / n, my = sy / n;
  double num = 0, den = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    num += (t[i] - mt) * (y[i] - my);
    den += (t[i] - mt) * (t[i] - mt);
  }
  return den > 0 ? num / den : 0.0;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse(const std::string& s, std::size_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

}  // namespace

LedgerRow compute_row(const State& s, const Sensitivities& sens, const RegParams& rp, const LedgerOptions& opt) {
  const double theta0 = sens.theta0;
  LedgerRow r;
  r.t = s.t;
  r.mass_n = s.n.integral();
  r.l1_c = s.c.integral();
  r.linf_c = s.c.max();
  r.entropy = s.n.map([](double v) { return (clip0(v) + 1.0) * std::log1p(clip0(v)); }).integral();

  const ScalarField sqrt_c = s.c.map([](double v) { return std::sqrt(clip0(v)); });
  const ScalarField sqrt_n1 = s.n.map([](double v) { return std::sqrt(clip0(v) + 1.0); });
  const VectorField grad_sqrt_c = gradient(sqrt_c, Dealias::skip);
  r.grad_sqrt_c_sq = grad_sq_integral(grad_sqrt_c);
  r.kinetic = s.u.l2_squared();

  r.diss_n = grad_sq_integral(gradient(sqrt_n1, Dealias::skip));
  r.diss_c = laplacian(sqrt_c).l2_squared();
  for (int a = 0; a < 3; ++a) r.diss_u += grad_sq_integral(gradient(s.u[a], Dealias::skip));

  const double floor = opt.c_floor;
  ScalarField q(s.grid_ptr());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double g2 = grad_sqrt_c[0][i] * grad_sqrt_c[0][i] + grad_sqrt_c[1][i] * grad_sqrt_c[1][i] +
                      grad_sqrt_c[2][i] * grad_sqrt_c[2][i];
    if (g2 == 0.0) continue;
    q[i] = g2 * g2 / std::max(clip0(s.c[i]), floor);
  }
  r.quartic_c = q.integral();

  r.U = r.mass_n + r.entropy + 2.0 / theta0 * r.grad_sqrt_c_sq + r.kinetic;
  r.V = r.diss_n + 4.0 / (3.0 * theta0) * r.diss_c + r.diss_u + 1.0 / (3.0 * theta0) * r.quartic_c;

  if (rp.mu == 0) {
    double fu = 0.0, fd = 0.0;
    for (int a = 0; a < 3; ++a) {
      const SpectralField uh = to_spectral(s.u[a]);
      fu += spectral::weighted_norm_sq(uh, 0.5);
      fd += spectral::weighted_norm_sq(uh, 1.5);
    }
    r.frac_u = fu;
    r.frac_diss = fd;
  }
  return r;
}

ForcingSample forcing_sample(const State& s, const RegParams& rp) {
  const VectorField f = effective_forcing(s.n, rp);
  ForcingSample out;
  out.t = s.t;
  out.work = dot(f, s.u).integral();
  const Grid& g = s.grid();
  const auto k2 = g.k_squared();
  const auto w = g.hermitian_weight();
  double fw = 0.0;
  for (int a = 0; a < 3; ++a) {
    const SpectralField fh = to_spectral(f[a]);
    const SpectralField uh = to_spectral(s.u[a]);
    for (std::size_t i = 0; i < fh.size(); ++i) fw += w[i] * std::sqrt(k2[i]) * (fh[i] * std::conj(uh[i])).real();
  }
  out.frac_work = fw * g.volume();
  return out;
}

ResidualSeries kinetic_balance_residual(const std::vector<LedgerRow>& rows, const std::vector<ForcingSample>& forcing) {
  require_uniform(rows, "kinetic_balance_residual");
  require_matching(rows, forcing, "kinetic_balance_residual");
  ResidualSeries r;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const double dt = rows[k + 1].t - rows[k].t;
    const double v = 0.5 * (rows[k + 1].kinetic - rows[k].kinetic) / dt + 0.5 * (rows[k].diss_u + rows[k + 1].diss_u) +
                     0.5 * (forcing[k].work + forcing[k + 1].work);
    r.t_mid.push_back(0.5 * (rows[k].t + rows[k + 1].t));
    r.values.push_back(v);
  }
  return finish(std::move(r));
}

ResidualSeries frac_balance_residual(const std::vector<LedgerRow>& rows, const std::vector<ForcingSample>& forcing,
                                     const RegParams& rp) {
  if (rp.mu != 0) throw std::invalid_argument("frac_balance_residual: only defined for the Stokes case (mu = 0)");
  require_uniform(rows, "frac_balance_residual");
  require_matching(rows, forcing, "frac_balance_residual");
  ResidualSeries r;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    if (!rows[k].frac_u || !rows[k + 1].frac_u || !rows[k].frac_diss || !rows[k + 1].frac_diss)
      throw std::invalid_argument("frac_balance_residual: rows lack the fractional columns");
    const double dt = rows[k + 1].t - rows[k].t;
    const double v = (*rows[k + 1].frac_u - *rows[k].frac_u) / dt + (*rows[k].frac_diss + *rows[k + 1].frac_diss) +
                     (forcing[k].frac_work + forcing[k + 1].frac_work);
    r.t_mid.push_back(0.5 * (rows[k].t + rows[k + 1].t));
    r.values.push_back(v);
  }
  return finish(std::move(r));
}

AffineFit fit_affine(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 2) throw std::invalid_argument("fit_affine: need matching series of length >= 2");
  AffineFit f;
  f.b = least_squares_slope(t, y, 0, t.size());
  double mt = 0, my = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= static_cast<double>(t.size());
  my /= static_cast<double>(t.size());
  f.a = my - f.b * mt;
  double dev = 0.0, scale = 0.0, r2 = 0.0, y2 = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - (f.a + f.b * t[i]);
    dev = std::max(dev, std::abs(r));
    scale = std::max(scale, std::abs(y[i]));
    r2 += r * r;
    y2 += y[i] * y[i];
  }
  f.max_rel_dev = scale > 0.0 ? dev / scale : 0.0;
  f.rel_residual = y2 > 0.0 ? std::sqrt(r2 / y2) : 0.0;
  return f;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return out;
}

GlobalReport global_inequality_report(const std::vector<LedgerRow>& rows) {
  if (rows.size() < 10) throw std::invalid_argument("global_inequality_report: need at least 10 rows");
  GlobalReport rep;
  std::vector<double> V;
  for (const auto& r : rows) {
    rep.t.push_back(r.t);
    V.push_back(r.V);
  }
  const auto iv = cumulative_trapezoid(rep.t, V);
  for (std::size_t i = 0; i < rows.size(); ++i) rep.G.push_back(rows[i].U + iv[i]);
  rep.fit = fit_affine(rep.t, rep.G);

  const std::size_t half = rows.size() / 2;
  rep.slope_first = least_squares_slope(rep.t, rep.G, 0, half + 1);
  rep.slope_second = least_squares_slope(rep.t, rep.G, half, rows.size());
  double gmax = 0.0;
  for (double g : rep.G) gmax = std::max(gmax, std::abs(g));
  const double span = rep.t.back() - rep.t.front();
  const double scale = span > 0.0 ? gmax / span : 0.0;
  rep.superlinear = rep.slope_second > std::max(rep.slope_first, 0.0) + 0.1 * scale;

  rep.monotone_nonincreasing = rep.monotone_nondecreasing = true;
  for (std::size_t i = 1; i < rep.G.size(); ++i) {
    const double tol = 1e-12 * std::max(1.0, gmax);
    if (rep.G[i] > rep.G[i - 1] + tol) rep.monotone_nonincreasing = false;
    if (rep.G[i] < rep.G[i - 1] - tol) rep.monotone_nondecreasing = false;
  }
  return rep;
}

const char* const ledger_csv_header =
    "t,mass_n,l1_c,linf_c,entropy,grad_sqrt_c_sq,kinetic,U,diss_n,diss_c,diss_u,quartic_c,V,frac_u,frac_diss";

void write_ledger_csv(std::ostream& os, const std::vector<LedgerRow>& rows) {
  os << ledger_csv_header << '\n';
  for (const auto& r : rows) {
    os << fmt(r.t) << ',' << fmt(r.mass_n) << ',' << fmt(r.l1_c) << ',' << fmt(r.linf_c) << ',' << fmt(r.entropy) << ','
       << fmt(r.grad_sqrt_c_sq) << ',' << fmt(r.kinetic) << ',' << fmt(r.U) << ',' << fmt(r.diss_n) << ','
       << fmt(r.diss_c) << ',' << fmt(r.diss_u) << ',' << fmt(r.quartic_c) << ',' << fmt(r.V) << ','
       << (r.frac_u ? fmt(*r.frac_u) : "") << ',' << (r.frac_diss ? fmt(*r.frac_diss) : "") << '\n';
  }
}

std::vector<LedgerRow> read_ledger_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != ledger_csv_header) throw std::runtime_error("ledger csv: unexpected header");
  std::vector<LedgerRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 15) throw std::runtime_error("ledger csv line " + std::to_string(lineno) + ": expected 15 columns");
    LedgerRow r;
    double* dst[] = {&r.t,      &r.mass_n, &r.l1_c,   &r.linf_c, &r.entropy,   &r.grad_sqrt_c_sq, &r.kinetic,
                     &r.U,      &r.diss_n, &r.diss_c, &r.diss_u, &r.quartic_c, &r.V};
    for (std::size_t i = 0; i < 13; ++i) *dst[i] = parse(c[i], lineno);
    if (!c[13].empty()) r.frac_u = parse(c[13], lineno);
    if (!c[14].empty()) r.frac_diss = parse(c[14], lineno);
    rows.push_back(r);
  }
  return rows;
}

void write_forcing_csv(std::ostream& os, const std::vector<ForcingSample>& f) {
  os << "t,work,frac_work\n";
  for (const auto& x : f) os << fmt(x.t) << ',' << fmt(x.work) << ',' << fmt(x.frac_work) << '\n';
}

std::vector<ForcingSample> read_forcing_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "t,work,frac_work") throw std::runtime_error("forcing csv: unexpected header");
  std::vector<ForcingSample> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 3) throw std::runtime_error("forcing csv line " + std::to_string(lineno) + ": expected 3 columns");
    out.push_back({parse(c[0], lineno), parse(c[1], lineno), parse(c[2], lineno)});
  }
  return out;
}

}  // namespace cnsr
