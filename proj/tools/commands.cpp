#include "commands.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "output.hpp"
#include "vpatch/cantor.hpp"
#include "vpatch/dynamics.hpp"
#include "vpatch/errors.hpp"
#include "vpatch/frequencies.hpp"
#include "vpatch/geometry.hpp"
#include "vpatch/kam.hpp"
#include "vpatch/linearized.hpp"

namespace vpcli {

using nlohmann::json;
using vpatch::cplx;

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw vpatch::invalid_argument("config: " + what);
}

std::vector<double> omega_or_default(const RunConfig& c) {
  if (!c.omega.empty()) return c.omega;
  return {std::numbers::phi};
}

vpatch::PatchState initial_state(const RunConfig& c) {
  if (c.amplitudes.empty()) return vpatch::PatchState::disc(c.b, c.M);
  return vpatch::quasi_periodic_seed(c.b, c.amplitudes, c.M);
}

std::vector<std::string> cmd_simulate(const RunConfig& c, const std::filesystem::path& dir) {
  const vpatch::PatchState s0 = initial_state(c);
  vpatch::EvolutionConfig ec;
  ec.dt = c.dt;
  ec.T = c.T;
  ec.M = c.M;
  ec.record_stride = c.stride;
  ec.dealias = c.dealias;
  ec.modes = c.modes;
  if (ec.modes.empty())
    for (const auto& kv : c.amplitudes) ec.modes.push_back(kv.first);
  const vpatch::Trajectory tr = vpatch::simulate(s0, ec);

  std::vector<std::string> header{"t", "mean", "hamiltonian", "hs_norm"};
  for (int j : tr.modes) {
    header.push_back("re_r" + std::to_string(j));
    header.push_back("im_r" + std::to_string(j));
  }
  {
    CsvWriter csv(dir / "trajectory.csv", header);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      std::vector<std::string> row{num(tr.times[k]), num(tr.means[k]), num(tr.hamiltonians[k]), num(tr.hs_norms[k])};
      for (const cplx& z : tr.mode_values[k]) {
        row.push_back(num(z.real()));
        row.push_back(num(z.imag()));
      }
      csv.row(row);
    }
  }
  const double H0 = tr.hamiltonians.front();
  double dH = 0.0, dm = 0.0;
  for (double h : tr.hamiltonians) dH = std::max(dH, std::abs(h - H0));
  for (double m : tr.means) dm = std::max(dm, std::abs(m - tr.means.front()));
  json sum;
  sum["status"] = tr.status;
  sum["samples"] = tr.times.size();
  sum["hamiltonian_initial"] = H0;
  sum["hamiltonian_relative_drift"] = H0 != 0.0 ? dH / std::abs(H0) : dH;
  sum["mean_drift"] = dm;
  json freqs = json::object();
  for (int j : tr.modes) {
    json e;
    e["Omega"] = vpatch::omega(c.b, j);
    try {
      e["extracted"] = std::abs(vpatch::extract_frequencies(tr, j));
    } catch (const vpatch::invariant_violation& ex) {
      e["extracted"] = nullptr;
      e["note"] = ex.what();
    } catch (const vpatch::invalid_argument& ex) {
      e["extracted"] = nullptr;
      e["note"] = ex.what();
    }
    freqs[std::to_string(j)] = e;
  }
  sum["frequencies"] = freqs;
  write_json(dir / "summary.json", sum);
  if (!tr.complete()) throw vpatch::invariant_violation("simulate: " + tr.status);
  return {"trajectory.csv", "summary.json"};
}

std::vector<std::string> cmd_linearize(const RunConfig& c, const std::filesystem::path& dir) {
  const vpatch::PatchState s = initial_state(c);
  const vpatch::LinearizedPieces pieces = vpatch::linearized_pieces(s, c.N);
  const auto& A = pieces.assembled;
  const auto& lat = A.lattice();
  {
    CsvWriter csv(dir / "matrix.csv", {"j", "k", "re", "im"});
    for (int r = 0; r < lat.size(); ++r)
      for (int k = 0; k < lat.size(); ++k) {
        const cplx z = A.entries()(r, k);
        csv.row({num(lat.site(r).j), num(lat.site(k).j), num(z.real()), num(z.imag())});
      }
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A.entries(), false);
  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](const cplx& a, const cplx& b) {
    return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
  });
  {
    CsvWriter csv(dir / "spectrum.csv", {"index", "re", "im"});
    for (std::size_t i = 0; i < ev.size(); ++i) csv.row({num(static_cast<long>(i)), num(ev[i].real()), num(ev[i].imag())});
  }
  double diag_err = 0.0;
  for (int r = 0; r < lat.size(); ++r)
    diag_err = std::max(diag_err, std::abs(A.entries()(r, r) - vpatch::equilibrium_multiplier(c.b, lat.site(r).j)));
  double sin_err = 0.0, disc_err = 0.0;
  for (int j = 1; j <= c.N; ++j) {
    sin_err = std::max(sin_err, std::abs(vpatch::log_sin_moment(j, c.M) + 1.0 / j));
    disc_err = std::max(disc_err, std::abs(vpatch::log_disc_moment(c.b, j, c.M) + std::pow(c.b, 2 * j) / (2.0 * j)));
  }
  double vdev = 0.0;
  for (double v : pieces.V.values()) vdev = std::max(vdev, std::abs(v - 0.5));
  json sum;
  sum["N"] = c.N;
  sum["M"] = c.M;
  sum["V_mean"] = pieces.V.mean();
  sum["V_sup_deviation_from_half"] = vdev;
  sum["F_sup"] = vpatch::velocity_functional(s).sup_norm();
  sum["max_offdiagonal"] = A.max_offdiagonal();
  sum["max_diagonal_error_vs_equilibrium"] = diag_err;
  sum["log_sin_moment_error"] = sin_err;
  sum["log_disc_moment_error"] = disc_err;
  sum["real"] = A.is_real(1e-10);
  sum["reversible"] = A.is_reversible(1e-10);
  if (!c.amplitudes.empty()) {
    sum["linear_flow_residual"] = vpatch::linear_flow_residual(c.b, c.amplitudes, c.T, c.M);
    // H(r) - H(0) against -sum Omega_j/(2j) |rho_j|^2, |rho_j|^2 = a_j^2/2 for a_j cos(j theta).
    double predicted = 0.0;
    for (const auto& [j, a] : c.amplitudes) predicted -= vpatch::omega(c.b, j) * a * a / (4.0 * j);
    const double measured = vpatch::hamiltonian(s) - vpatch::hamiltonian(vpatch::PatchState::disc(c.b, c.M));
    sum["hamiltonian_quadratic_form"] = {
        {"measured", measured}, {"predicted", predicted}, {"relative_error", std::abs(measured - predicted) / std::abs(predicted)}};
  }
  write_json(dir / "summary.json", sum);
  return {"matrix.csv", "spectrum.csv", "summary.json"};
}

vpatch::FrequencySystem frequency_system(const RunConfig& c) {
  vpatch::FrequencySystem sys;
  sys.sites = c.sites;
  sys.validate();
  return sys;
}

json case_json(const vpatch::CaseReport& cr) {
  return {{"case", cr.name},
          {"rho0_hat", cr.rho0_hat},
          {"functions", cr.functions},
          {"witness",
           {{"b", cr.witness.b}, {"l", cr.witness.l}, {"j", cr.witness.j}, {"j0", cr.witness.j0},
            {"q", cr.witness.q}, {"sign", cr.witness.sign}}}};
}

std::vector<std::string> cmd_spectrum(const RunConfig& c, const std::filesystem::path& dir) {
  std::vector<std::string> files{"omega.csv", "summary.json"};
  {
    CsvWriter csv(dir / "omega.csv", {"j", "Omega", "Omega_over_j"});
    for (int j = 1; j <= c.jmax; ++j) {
      const double w = vpatch::omega(c.b, j);
      csv.row({num(j), num(w), num(w / j)});
    }
  }
  const vpatch::FrequencySystem sys = frequency_system(c);
  const vpatch::MonotonicityReport mono = vpatch::check_monotonicity(c.b, c.jmax);
  json sum;
  sum["b"] = c.b;
  sum["monotonicity"] = {{"increasing", mono.increasing}, {"min_gap", mono.min_gap}, {"argmin_j", mono.argmin_j}};
  sum["nondegenerate"] = vpatch::nondegeneracy_test(sys);
  sum["q0"] = sys.q0();
  if (c.transversality) {
    vpatch::ScanOptions opt;
    opt.Lmax = c.lmax;
    opt.grid = c.grid;
    opt.jobs = c.jobs;
    std::vector<vpatch::TransversalityReport> reps{vpatch::transversality_scan(sys, opt)};
    if (c.eps_hat > 0.0) reps.push_back(vpatch::perturbed_transversality(sys, opt, c.eps_hat));
    CsvWriter csv(dir / "transversality.csv",
                  {"case", "perturbation", "rho0_hat", "b", "l", "j", "j0", "q", "functions"});
    json scans = json::array();
    for (const auto& r : reps) {
      json cases = json::array();
      for (const auto& cr : r.cases) {
        csv.row({cr.name, num(r.perturbation), num(cr.rho0_hat), num(cr.witness.b), join(cr.witness.l),
                 num(cr.witness.j), num(cr.witness.j0), num(cr.witness.q), num(cr.functions)});
        cases.push_back(case_json(cr));
      }
      scans.push_back({{"perturbation", r.perturbation}, {"rho0_hat", r.rho0_hat}, {"cases", cases}});
    }
    sum["transversality"] = {{"Lmax", c.lmax}, {"grid", c.grid}, {"scans", scans}};
    if (reps.size() == 2) sum["transversality"]["retained_ratio"] = reps[1].rho0_hat / reps[0].rho0_hat;
    files.insert(files.begin() + 1, "transversality.csv");
  }
  write_json(dir / "summary.json", sum);
  return files;
}

vpatch::DiophantineSpec diophantine(const RunConfig& c) {
  vpatch::DiophantineSpec sp;
  sp.kind = vpatch::parse_kind(c.kind);
  sp.gamma = c.gamma;
  sp.upsilon = c.upsilon;
  sp.tau = sp.kind == vpatch::ResonanceKind::second_order ? c.tau2 : c.tau1;
  sp.tau1 = c.tau1;
  sp.Lmax = c.lmax;
  sp.jobs = c.jobs;
  return sp;
}

std::vector<std::string> cmd_cantor(const RunConfig& c, const std::filesystem::path& dir) {
  const vpatch::FrequencySystem sys = frequency_system(c);
  const vpatch::DiophantineSpec sp = diophantine(c);
  const vpatch::MeasureReport rep = vpatch::excluded_measure(sys, sp);
  {
    CsvWriter csv(dir / "intervals.csv", {"l", "j", "j0", "left", "right", "length"});
    for (const auto& ct : rep.contributions)
      for (const auto& iv : ct.set.intervals())
        csv.row({join(ct.l), num(ct.j), ct.has_j0 ? num(ct.j0) + (ct.tail ? "+" : "") : "", num(iv.lo), num(iv.hi),
                 num(iv.length())});
  }
  json sum;
  sum["kind"] = vpatch::to_string(sp.kind);
  sum["gamma"] = sp.gamma;
  sum["tau"] = sp.tau;
  sum["upsilon"] = sp.upsilon;
  sum["Lmax"] = sp.Lmax;
  sum["excluded"] = rep.total;
  sum["remaining"] = (sys.b1 - sys.b0) - rep.total;
  sum["contributions"] = rep.contributions.size();
  sum["functions"] = rep.functions;
  sum["flagged_cells"] = rep.flagged;
  sum["C0"] = rep.C0_used;
  sum["truncated"] = rep.truncated;
  if (!c.gammas.empty()) {
    const vpatch::GammaStudy st = vpatch::gamma_study(sys, sp, c.gammas);
    sum["gamma_study"] = {{"gammas", st.gammas},
                          {"excluded", st.excluded},
                          {"exponent", st.exponent},
                          {"prefactor", st.prefactor},
                          {"strictly_decreasing", st.strictly_decreasing},
                          {"nested", st.nested},
                          {"one_over_q0", 1.0 / sys.q0()}};
  }
  if (c.rho0 > 0.0) {
    const vpatch::RussmannCheck rc = vpatch::check_russmann(sys, sp, rep, c.rho0);
    json shells = json::object();
    for (const auto& [n, v] : rc.shell_bound) shells[std::to_string(n)] = v;
    sum["russmann"] = {{"rho0_hat", c.rho0},
                       {"checked", rc.checked},
                       {"violations", rc.violations},
                       {"worst_ratio", rc.worst_ratio},
                       {"shell_bound", shells},
                       {"tail_exponent", rc.tail_exponent},
                       {"tail_bound", std::isfinite(rc.tail_bound) ? json(rc.tail_bound) : json("inf")}};
  }
  write_json(dir / "summary.json", sum);
  return {"intervals.csv", "summary.json"};
}

std::vector<std::string> cmd_kam_transport(const RunConfig& c, const std::filesystem::path& dir) {
  vpatch::TransportProblem p;
  p.omega = omega_or_default(c);
  require(c.phi_grid.size() == p.omega.size(), "phi-grid needs one size per frequency");
  std::vector<int> grid = c.phi_grid;
  grid.push_back(c.M);
  const double va = c.v_amp, wa = c.w_amp;
  p.f0 = vpatch::PeriodicField::sample(grid, [va, wa](const std::vector<double>& phi, double th) {
    double s = 0.0;
    for (double x : phi) s += x;
    return va * std::cos(th) + wa * std::cos(s + th);
  });
  p.gamma = c.gamma;
  p.upsilon = c.upsilon;
  p.tau1 = c.tau1;
  p.N0 = c.N0;
  const vpatch::TransportResult res = vpatch::straighten_transport(p, c.steps);
  {
    CsvWriter csv(dir / "steps.csv", {"m", "N", "delta_sup", "delta_s", "cut_fraction", "V_m"});
    for (const auto& st : res.history)
      csv.row({num(st.m), num(st.N), num(st.delta_sup), num(st.delta_s), num(st.cut_fraction), num(st.V)});
  }
  {
    CsvWriter csv(dir / "cuts.csv", {"step", "l", "j", "divisor", "chi"});
    for (const auto& cm : res.cuts) csv.row({num(cm.step), join(cm.l), num(cm.j), num(cm.divisor), num(cm.chi)});
  }
  json sum;
  sum["V_inf"] = res.V_inf;
  if (c.w_amp == 0.0 && std::abs(c.v_amp) < 0.5) sum["V_inf_rotation_number"] = std::sqrt(0.25 - c.v_amp * c.v_amp);
  sum["superlinear_slope"] = res.superlinear_slope;
  sum["reducible"] = res.reducible;
  sum["in_cantor_set"] = res.in_cantor_set;
  sum["cut_modes"] = res.cuts.size();
  sum["omega"] = p.omega;
  sum["inversion_defect"] = res.change.inversion_defect();
  write_json(dir / "summary.json", sum);
  return {"steps.csv", "cuts.csv", "summary.json"};
}

std::vector<std::string> cmd_kam_remainder(const RunConfig& c, const std::filesystem::path& dir) {
  require(c.seed.has_value(), "kam-remainder needs --seed");
  vpatch::RemainderSpec spec;
  spec.omega = omega_or_default(c);
  spec.gamma = c.gamma;
  spec.tau2 = c.tau2;
  spec.N0 = c.N0;
  const int d = static_cast<int>(spec.omega.size());
  const auto R0 = vpatch::synthetic_remainder(d, c.L, c.J, c.lsupp, c.band, c.delta0, spec.s0, *c.seed);
  const auto init = vpatch::ReductionState::around(c.b, R0);
  const vpatch::RemainderRun run = vpatch::reduce_remainder(init, spec, c.steps);
  {
    CsvWriter csv(dir / "steps.csv", {"m", "delta_s0", "delta_sh", "cut_entries", "conjugation_defect", "V_m"});
    for (std::size_t m = 0; m < run.states.size(); ++m) {
      const bool has_step = m < run.conjugation_defects.size();
      csv.row({num(static_cast<long>(m)), num(run.delta_s0[m]), num(run.delta_sh[m]),
               has_step ? num(run.cut_counts[m]) : "", has_step ? num(run.conjugation_defects[m]) : "", num(0.5)});
    }
  }
  const auto& last = run.states.back();
  json table = json::array();
  for (int j = 1; j <= c.J; ++j) {
    const double w = vpatch::omega(c.b, j);
    table.push_back({{"j", j}, {"mu_inf_imag", last.frequency(j)}, {"Omega", w}, {"r", last.frequency(j) - w}});
  }
  write_json(dir / "spectrum.json", {{"V_inf", 0.5}, {"modes", table}});
  json sum;
  sum["slope"] = run.slope;
  sum["sup_j_r"] = run.sup_j_r;
  sum["sup_j_r_bound"] = 10.0 * c.delta0;
  sum["max_structure_defect"] = run.max_structure_defect;
  sum["in_cantor_set"] = run.in_cantor_set;
  sum["delta_s0"] = run.delta_s0;
  sum["omega"] = spec.omega;
  write_json(dir / "summary.json", sum);
  return {"steps.csv", "spectrum.json", "summary.json"};
}

}  // namespace

void RunConfig::validate() const {
  require(b > 0.0 && b < 1.0, "b must lie in (0,1)");
  require(M >= 8 && (M & (M - 1)) == 0, "M must be a power of two >= 8");
  require(N >= 1 && 3 * N <= M, "need 1 <= N <= M/3");
  require(dt > 0.0 && T > 0.0, "dt and T must be positive");
  require(stride >= 1, "stride must be >= 1");
  require(jmax >= 1 && jmax <= 10000, "jmax must lie in 1..10000");
  require(grid >= 2, "grid must be >= 2");
  require(eps_hat >= 0.0 && eps_hat < 0.25, "eps-hat must lie in [0, 1/4)");
  require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0,1)");
  require(tau1 > 0.0 && tau2 > 0.0, "tau1 and tau2 must be positive");
  require(upsilon > 0.0 && upsilon <= 1.0, "upsilon must lie in (0,1]");
  require(lmax >= 1 && lmax <= 200, "lmax must lie in 1..200");
  for (double g : gammas) require(g > 0.0 && g < 1.0, "gammas must lie in (0,1)");
  require(rho0 >= 0.0, "rho0 must be nonnegative");
  for (int n : phi_grid) require(n >= 4 && (n & (n - 1)) == 0, "phi-grid sizes must be powers of two >= 4");
  require(steps >= 1 && steps <= 20, "steps must lie in 1..20");
  require(N0 >= 2, "N0 must be >= 2");
  require(delta0 > 0.0, "delta0 must be positive");
  require(L >= 0 && J >= 1 && lsupp >= 0 && lsupp <= L && band >= 0, "bad remainder support");
  require(jobs >= 1 && jobs <= 256, "jobs must lie in 1..256");
  for (const auto& [j, a] : amplitudes) require(j >= 1 && std::isfinite(a), "amplitude keys must be positive modes");
}

void to_json(json& j, const RunConfig& c) {
  json amps = json::object();
  for (const auto& [k, a] : c.amplitudes) amps[std::to_string(k)] = a;
  j = json{{"subcommand", c.subcommand},
           {"b", c.b},
           {"sites", c.sites},
           {"amplitudes", amps},
           {"M", c.M},
           {"N", c.N},
           {"dt", c.dt},
           {"T", c.T},
           {"stride", c.stride},
           {"modes", c.modes},
           {"dealias", c.dealias},
           {"jmax", c.jmax},
           {"transversality", c.transversality},
           {"grid", c.grid},
           {"eps_hat", c.eps_hat},
           {"kind", c.kind},
           {"gamma", c.gamma},
           {"tau1", c.tau1},
           {"tau2", c.tau2},
           {"upsilon", c.upsilon},
           {"lmax", c.lmax},
           {"gammas", c.gammas},
           {"rho0", c.rho0},
           {"omega", c.omega},
           {"phi_grid", c.phi_grid},
           {"v_amp", c.v_amp},
           {"w_amp", c.w_amp},
           {"steps", c.steps},
           {"N0", c.N0},
           {"seed", c.seed ? json(*c.seed) : json(nullptr)},
           {"delta0", c.delta0},
           {"L", c.L},
           {"J", c.J},
           {"lsupp", c.lsupp},
           {"band", c.band},
           {"jobs", c.jobs}};
}

void merge_json(const json& j, RunConfig& c) {
  if (!j.is_object()) throw vpatch::invalid_argument("config: top level must be an object");
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("b", c.b);
  get("sites", c.sites);
  if (j.contains("amplitudes")) {
    c.amplitudes.clear();
    for (const auto& [k, v] : j.at("amplitudes").items()) c.amplitudes[std::stoi(k)] = v.get<double>();
  }
  get("M", c.M);
  get("N", c.N);
  get("dt", c.dt);
  get("T", c.T);
  get("stride", c.stride);
  get("modes", c.modes);
  get("dealias", c.dealias);
  get("jmax", c.jmax);
  get("transversality", c.transversality);
  get("grid", c.grid);
  get("eps_hat", c.eps_hat);
  get("kind", c.kind);
  get("gamma", c.gamma);
  get("tau1", c.tau1);
  get("tau2", c.tau2);
  get("upsilon", c.upsilon);
  get("lmax", c.lmax);
  get("gammas", c.gammas);
  get("rho0", c.rho0);
  get("omega", c.omega);
  get("phi_grid", c.phi_grid);
  get("v_amp", c.v_amp);
  get("w_amp", c.w_amp);
  get("steps", c.steps);
  get("N0", c.N0);
  if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
  get("delta0", c.delta0);
  get("L", c.L);
  get("J", c.J);
  get("lsupp", c.lsupp);
  get("band", c.band);
  get("out", c.out);
  get("jobs", c.jobs);
}

std::map<int, double> parse_amplitudes(const std::string& s) {
  std::map<int, double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw vpatch::invalid_argument("amplitudes: expected j:a, got '" + item + "'");
    try {
      std::size_t used = 0;
      const int j = std::stoi(item.substr(0, colon), &used);
      const std::string rest = item.substr(colon + 1);
      std::size_t used2 = 0;
      const double a = std::stod(rest, &used2);
      if (used2 != rest.size()) throw std::invalid_argument(rest);
      out[j] = a;
    } catch (const std::logic_error&) {
      throw vpatch::invalid_argument("amplitudes: cannot parse '" + item + "'");
    }
  }
  return out;
}

std::vector<std::string> run_subcommand(const RunConfig& c, const std::filesystem::path& dir) {
  if (c.subcommand == "simulate") return cmd_simulate(c, dir);
  if (c.subcommand == "linearize") return cmd_linearize(c, dir);
  if (c.subcommand == "spectrum") return cmd_spectrum(c, dir);
  if (c.subcommand == "cantor") return cmd_cantor(c, dir);
  if (c.subcommand == "kam-transport") return cmd_kam_transport(c, dir);
  if (c.subcommand == "kam-remainder") return cmd_kam_remainder(c, dir);
  throw vpatch::invalid_argument("unknown subcommand " + c.subcommand);
}

}  // namespace vpcli
