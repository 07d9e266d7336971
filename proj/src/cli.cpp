#include "odb/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "odb/basis.hpp"
#include "odb/evolution.hpp"
#include "odb/fock.hpp"
#include "odb/kernels.hpp"
#include "odb/oracle.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

namespace odb::cli {

namespace {

using nlohmann::json;
using fock::cplx;
using fock::cmat;

// Configuration problems get their own type so run_cli can map them to exit
// code 2 (usage error) instead of 1 (failed check).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json cplx_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

std::string variant_name(sop::Variant v) {
  return v == sop::Variant::weak ? "weak" : "dsme";
}

json params_json(const sop::SystemParams& p) {
  return json{{"omega", p.omega}, {"nu", p.nu},       {"chi", p.chi},
              {"kappa", p.kappa}, {"gamma", p.gamma}, {"mbar", p.mbar},
              {"variant", variant_name(p.variant)}};
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw ConfigError("cannot open output file: " + out_path);
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

sop::Variant parse_variant(const std::string& s) {
  if (s == "weak") return sop::Variant::weak;
  if (s == "dsme") return sop::Variant::dsme;
  throw ConfigError("unknown variant '" + s + "' (expected weak or dsme)");
}

double get_num(const json& j, const char* key) {
  if (!j.at(key).is_number()) throw ConfigError(std::string("config field ") + key + " must be a number");
  return j.at(key).get<double>();
}

}  // namespace

void RunConfig::validate() const {
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (Nc < 1 || Nm < 1) throw ConfigError("dimensions Nc, Nm must be >= 1");
  if (buffer < 0) throw ConfigError("buffer must be >= 0");
  if (l_max < 0 || n_max < 0 || k_max < 0 || m_max < 0)
    throw ConfigError("label ranges must be >= 0");
  for (double tol : {tol_spectrum, tol_residual, tol_gram, tol_crosstrace, tol_pathsum})
    if (!(tol > 0.0)) throw ConfigError("tolerances must be positive");
  if (format != "json" && format != "csv")
    throw ConfigError("format must be json or csv");
  if (jobs < 0) throw ConfigError("jobs must be >= 0");
}

void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file: " + path);
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }

  for (const auto& [key, val] : doc.items()) {
    if (key == "params") {
      for (const auto& [pk, pv] : val.items()) {
        if (pk == "omega") cfg.params.omega = get_num(val, "omega");
        else if (pk == "nu") cfg.params.nu = get_num(val, "nu");
        else if (pk == "chi") cfg.params.chi = get_num(val, "chi");
        else if (pk == "kappa") cfg.params.kappa = get_num(val, "kappa");
        else if (pk == "gamma") cfg.params.gamma = get_num(val, "gamma");
        else if (pk == "mbar") cfg.params.mbar = get_num(val, "mbar");
        else if (pk == "variant") cfg.params.variant = parse_variant(pv.get<std::string>());
        else throw ConfigError("unknown params field: " + pk);
        (void)pv;
      }
    } else if (key == "Nc") cfg.Nc = val.get<int>();
    else if (key == "Nm") cfg.Nm = val.get<int>();
    else if (key == "buffer") cfg.buffer = val.get<int>();
    else if (key == "ranges") {
      for (const auto& [rk, rv] : val.items()) {
        if (rk == "l_max") cfg.l_max = rv.get<int>();
        else if (rk == "n_max") cfg.n_max = rv.get<int>();
        else if (rk == "k_max") cfg.k_max = rv.get<int>();
        else if (rk == "m_max") cfg.m_max = rv.get<int>();
        else throw ConfigError("unknown ranges field: " + rk);
      }
    } else if (key == "tolerances") {
      for (const auto& [tk, tv] : val.items()) {
        if (tk == "spectrum") cfg.tol_spectrum = tv.get<double>();
        else if (tk == "residual") cfg.tol_residual = tv.get<double>();
        else if (tk == "gram") cfg.tol_gram = tv.get<double>();
        else if (tk == "crosstrace") cfg.tol_crosstrace = tv.get<double>();
        else if (tk == "pathsum") cfg.tol_pathsum = tv.get<double>();
        else throw ConfigError("unknown tolerances field: " + tk);
      }
    } else if (key == "format") cfg.format = val.get<std::string>();
    else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
    else if (key == "jobs") cfg.jobs = val.get<int>();
    else throw ConfigError("unknown config field: " + key);
  }
}

namespace {

// ---------------------------------------------------------------- spectrum

int cmd_spectrum(const RunConfig& cfg, const std::string& out_path) {
  struct Row { int l, n, k, m; cplx lam; };
  std::vector<Row> rows;
  for (int l = -cfg.l_max; l <= cfg.l_max; ++l)
    for (int n = 0; n <= cfg.n_max; ++n)
      for (int k = -cfg.k_max; k <= cfg.k_max; ++k)
        for (int m = 0; m <= cfg.m_max; ++m)
          rows.push_back({l, n, k, m, basis::eigenvalue({l, n, k, m}, cfg.params)});

  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "l,n,k,m,re_lambda,im_lambda\n";
    for (const auto& r : rows)
      os << r.l << ',' << r.n << ',' << r.k << ',' << r.m << ','
         << fmt_double(r.lam.real()) << ',' << fmt_double(r.lam.imag()) << '\n';
    write_output(os.str(), out_path);
  } else {
    json doc{{"schema", "odb.spectrum.v1"},
             {"params", params_json(cfg.params)},
             {"rows", json::array()}};
    for (const auto& r : rows)
      doc["rows"].push_back(json{{"l", r.l}, {"n", r.n}, {"k", r.k}, {"m", r.m},
                                 {"eigenvalue", cplx_json(r.lam)}});
    write_output(doc.dump(2), out_path);
  }
  return 0;
}

// ----------------------------------------------------------------- eigvec

int cmd_eigvec(const RunConfig& cfg, int l, int n, int k, int m,
               const std::string& side_s, bool pathsum, const std::string& out_path) {
  basis::Side side;
  if (side_s == "right") side = basis::Side::right;
  else if (side_s == "left") side = basis::Side::left;
  else throw ConfigError("side must be right or left");
  if (pathsum && side == basis::Side::left)
    throw ConfigError("path-sum construction is available for right elements only");

  basis::EigenLabel lab{l, n, k, m, side};
  basis::BasisElement e;
  if (side == basis::Side::left) e = basis::left_eigvec(lab, cfg.params, cfg.Nc, cfg.Nm);
  else if (pathsum) e = basis::right_eigvec_pathsum(lab, cfg.params, cfg.Nc, cfg.Nm);
  else e = basis::right_eigvec(lab, cfg.params, cfg.Nc, cfg.Nm);

  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "block,row,col,re,im\n";
    for (size_t b = 0; b < e.blocks.size(); ++b) {
      const cmat& blk = e.blocks[b];
      for (int i = 0; i < blk.rows(); ++i)
        for (int j = 0; j < blk.cols(); ++j)
          os << (e.first_block + (int)b) << ',' << i << ',' << j << ','
             << fmt_double(blk(i, j).real()) << ',' << fmt_double(blk(i, j).imag()) << '\n';
    }
    write_output(os.str(), out_path);
  } else {
    json doc{{"schema", "odb.eigvec.v1"},
             {"params", params_json(cfg.params)},
             {"label", json{{"l", lab.l}, {"n", lab.n}, {"k", lab.k}, {"m", lab.m}, {"side", side_s}}},
             {"eigenvalue", cplx_json(e.eigenvalue)},
             {"first_block", e.first_block},
             {"Nc", cfg.Nc},
             {"Nm", cfg.Nm},
             {"blocks", json::array()}};
    for (size_t b = 0; b < e.blocks.size(); ++b) {
      const cmat& blk = e.blocks[b];
      json rows = json::array();
      for (int i = 0; i < blk.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < blk.cols(); ++j) row.push_back(cplx_json(blk(i, j)));
        rows.push_back(std::move(row));
      }
      doc["blocks"].push_back(json{{"j", e.first_block + (int)b}, {"entries", std::move(rows)}});
    }
    write_output(doc.dump(2), out_path);
  }
  return 0;
}

// ----------------------------------------------------------------- verify

struct Check {
  std::string name;
  bool pass = false;
  double worst = 0.0;
  double tolerance = 0.0;
};

// Labels swept by verify: within the configured ranges and clear of the
// photon truncation edge (n + |l| <= Nc - 2), so every element is
// constructible on both sides and its residual is meaningful.
std::vector<basis::EigenLabel> verify_label_set(const RunConfig& cfg) {
  std::vector<basis::EigenLabel> labs;
  for (int l = -cfg.l_max; l <= cfg.l_max; ++l)
    for (int n = 0; n <= cfg.n_max; ++n) {
      if (n + std::abs(l) > cfg.Nc - 2) continue;
      for (int k = -cfg.k_max; k <= cfg.k_max; ++k)
        for (int m = 0; m <= cfg.m_max; ++m)
          labs.push_back({l, n, k, m, basis::Side::right});
    }
  return labs;
}

double rel_block_diff(const basis::BasisElement& a, const basis::BasisElement& b) {
  if (a.blocks.size() != b.blocks.size() || a.first_block != b.first_block)
    throw std::runtime_error("rel_block_diff: element shapes differ");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    num += (a.blocks[i] - b.blocks[i]).squaredNorm();
    den += b.blocks[i].squaredNorm();
  }
  return std::sqrt(num / den);
}

int cmd_verify(const RunConfig& cfg, const std::string& out_path) {
  const int dim = cfg.Nc * cfg.Nm;
  if (dim * dim > 4096)
    throw ConfigError("verify: superoperator dimension " + std::to_string(dim * dim) +
                      " exceeds the 4096 brute-force cap; reduce Nc or Nm");

  const auto labels = verify_label_set(cfg);
  std::vector<Check> checks;

  // 1. analytic spectrum vs brute-force eigensolve of the full Liouvillian
  {
    sop::SuperOp L = sop::build_liouvillian(cfg.params, cfg.Nc, cfg.Nm);
    const auto numeric = oracle::brute_spectrum(L);
    std::vector<std::pair<basis::EigenLabel, cplx>> analytic;
    for (const auto& lab : labels)
      analytic.push_back({lab, basis::eigenvalue(lab, cfg.params)});
    auto rep = oracle::match_spectrum(analytic, numeric, cfg.tol_spectrum);
    checks.push_back({"spectrum_match", rep.all_within_tol(), rep.worst_delta(), cfg.tol_spectrum});
  }

  // 2. right-element residuals under the operator-form Liouvillian
  std::vector<basis::BasisElement> rights(labels.size());
  {
    double worst = 0.0;
    for (size_t i = 0; i < labels.size(); ++i) {
      rights[i] = basis::right_eigvec(labels[i], cfg.params, cfg.Nc, cfg.Nm);
      worst = std::max(worst, oracle::residual(cfg.params, rights[i], basis::Side::right,
                                               cfg.Nc, cfg.Nm));
    }
    checks.push_back({"residuals", worst <= cfg.tol_residual, worst, cfg.tol_residual});
  }

  // 3. Gram matrix of assembled left/right pairs
  {
    std::vector<cmat> lmats(labels.size()), rmats(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) {
      auto lab = labels[i];
      lab.side = basis::Side::left;
      lmats[i] = basis::assemble(basis::left_eigvec(lab, cfg.params, cfg.Nc, cfg.Nm), cfg.Nc, cfg.Nm);
      rmats[i] = basis::assemble(rights[i], cfg.Nc, cfg.Nm);
    }
    cmat G = kern::pairwise_traces(lmats, rmats);
    double worst = 0.0;
    for (int i = 0; i < G.rows(); ++i)
      for (int j = 0; j < G.cols(); ++j)
        worst = std::max(worst, std::abs(G(i, j) - (i == j ? 1.0 : 0.0)));
    checks.push_back({"gram", worst <= cfg.tol_gram, worst, cfg.tol_gram});
  }

  // 4. cross-trace vanishing identity on random eigenvalue tuples
  {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<int> dl(0, cfg.l_max), dn(0, cfg.n_max);
    std::uniform_int_distribution<int> dlen(1, 3);
    std::uniform_int_distribution<int> dk(-cfg.k_max, cfg.k_max), dm(0, cfg.m_max);
    const double gap_floor = 0.03 * std::max(cfg.params.gamma, cfg.params.kappa);
    double worst = 0.0;
    int accepted = 0;
    while (accepted < 100) {
      const int l = dl(rng), n0 = dn(rng), len = dlen(rng);
      std::vector<cplx> lam;
      for (int s = n0; s <= n0 + len; ++s)
        lam.push_back(basis::eigenvalue({l, s, dk(rng), dm(rng)}, cfg.params));
      double gap = 1e300;
      for (size_t i = 0; i < lam.size(); ++i)
        for (size_t j = i + 1; j < lam.size(); ++j)
          gap = std::min(gap, std::abs(lam[i] - lam[j]));
      if (gap < gap_floor) continue;
      worst = std::max(worst, std::abs(oracle::cross_trace_inner_sum(lam)));
      ++accepted;
    }
    checks.push_back({"crosstrace", worst <= cfg.tol_crosstrace, worst, cfg.tol_crosstrace});
  }

  // 5. path-sum construction agrees with the resolvent recursion
  {
    double worst = 0.0;
    for (size_t i = 0; i < labels.size(); ++i) {
      if (labels[i].n > 2) continue;
      auto ps = basis::right_eigvec_pathsum(labels[i], cfg.params, cfg.Nc, cfg.Nm);
      worst = std::max(worst, rel_block_diff(ps, rights[i]));
    }
    checks.push_back({"pathsum", worst <= cfg.tol_pathsum, worst, cfg.tol_pathsum});
  }

  bool all = true;
  for (const auto& c : checks) all = all && c.pass;

  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "check,pass,worst,tolerance\n";
    for (const auto& c : checks)
      os << c.name << ',' << (c.pass ? 1 : 0) << ',' << fmt_double(c.worst) << ','
         << fmt_double(c.tolerance) << '\n';
    write_output(os.str(), out_path);
  } else {
    json doc{{"schema", "odb.verify.v1"},
             {"params", params_json(cfg.params)},
             {"Nc", cfg.Nc},
             {"Nm", cfg.Nm},
             {"labels", (int)labels.size()},
             {"pass", all},
             {"checks", json::array()}};
    for (const auto& c : checks)
      doc["checks"].push_back(json{{"name", c.name}, {"pass", c.pass},
                                   {"worst", c.worst}, {"tolerance", c.tolerance}});
    write_output(doc.dump(2), out_path);
  }
  return all ? 0 : 1;
}

// ----------------------------------------------------------------- evolve

cmat thermal_state(double mbar, int dim) {
  cmat r = cmat::Zero(dim, dim);
  if (mbar <= 0.0) {
    r(0, 0) = 1.0;
    return r;
  }
  // exact Boltzmann masses of the untruncated state; the missing tail is
  // (mbar/(mbar+1))^dim, which the caller's dimension choice controls
  for (int q = 0; q < dim; ++q)
    r(q, q) = std::pow(mbar / (mbar + 1.0), q) / (mbar + 1.0);
  return r;
}

cmat fock_state(int q, int dim) {
  if (q < 0 || q >= dim) throw ConfigError("fock index out of range");
  cmat r = cmat::Zero(dim, dim);
  r(q, q) = 1.0;
  return r;
}

cmat coherent_state(cplx alpha, int dim) {
  Eigen::VectorXcd v = fock::displacement(alpha, dim).col(0);
  return v * v.adjoint();
}

std::vector<double> parse_nums(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw ConfigError("bad number in list: " + tok);
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

cmat parse_single_mode(const std::string& s, int dim) {
  auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("bad state spec: " + s);
  const std::string kind = s.substr(0, colon);
  const auto args = parse_nums(s.substr(colon + 1));
  if (kind == "fock" && args.size() == 1) return fock_state((int)args[0], dim);
  if (kind == "coherent" && args.size() == 2) return coherent_state({args[0], args[1]}, dim);
  if (kind == "thermal" && args.size() == 1) return thermal_state(args[0], dim);
  throw ConfigError("bad state spec: " + s);
}

// Initial-state grammar (see docs/output_schema.md):
//   fock:N,Q                    joint Fock state |N><N| x |Q><Q|
//   coherent_thermal:RE,IM,MB   coherent cavity x thermal mechanics
//   CAV;MECH                    any product, CAV in {fock:N, coherent:RE,IM},
//                               MECH in {fock:Q, thermal:MB}
cmat parse_initial(const std::string& spec, int Nc, int Nm) {
  auto semi = spec.find(';');
  if (semi != std::string::npos) {
    cmat cav = parse_single_mode(spec.substr(0, semi), Nc);
    cmat mech = parse_single_mode(spec.substr(semi + 1), Nm);
    return kern::kron(cav, mech);
  }
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("bad initial state spec: " + spec);
  const std::string kind = spec.substr(0, colon);
  const auto args = parse_nums(spec.substr(colon + 1));
  if (kind == "fock" && args.size() == 2)
    return kern::kron(fock_state((int)args[0], Nc), fock_state((int)args[1], Nm));
  if (kind == "coherent_thermal" && args.size() == 3)
    return kern::kron(coherent_state({args[0], args[1]}, Nc), thermal_state(args[2], Nm));
  throw ConfigError("bad initial state spec: " + spec);
}

struct EvolveRow {
  double t;
  std::string method;
  evo::Observables obs;
  double trace_distance = -1.0;  // < 0 means not applicable
};

int cmd_evolve(const RunConfig& cfg, const std::string& initial, const std::string& times_s,
               const std::string& method, const std::string& integrator,
               const std::string& out_path) {
  const auto times = parse_nums(times_s);
  for (size_t i = 0; i < times.size(); ++i)
    if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1]))
      throw ConfigError("times must be sorted and nonnegative");
  if (method != "spectral" && method != "direct" && method != "both")
    throw ConfigError("method must be spectral, direct or both");

  const cmat rho0 = parse_initial(initial, cfg.Nc, cfg.Nm);

  std::vector<cmat> spectral, direct;
  double recon_err = 0.0;
  if (method != "direct") {
    // The decomposition label set needs enough mechanical depth to represent
    // thermal or excited-Fock initial states; cfg.m_max only scopes the verify
    // checks. Cap at Nm - 2 so truncation-edge elements stay out of the basis.
    const int m_cut = std::min(cfg.Nm - 2, 12);
    auto dec = evo::decompose(rho0, evo::default_label_set(cfg.Nc, m_cut), cfg.params,
                              cfg.Nc, cfg.Nm);
    recon_err = dec.t0_reconstruction_error;
    spectral = evo::evolve_many(dec, times);
  }
  if (method != "spectral") {
    oracle::DirectOptions opt;
    if (integrator == "adaptive") opt.method = oracle::Method::adaptive;
    else if (integrator != "expm") throw ConfigError("integrator must be expm or adaptive");
    sop::SuperOp L = sop::build_liouvillian(cfg.params, cfg.Nc, cfg.Nm);
    direct = oracle::direct_evolve(L, rho0, times, opt);
  }

  std::vector<EvolveRow> rows;
  for (size_t i = 0; i < times.size(); ++i) {
    double td = -1.0;
    if (!spectral.empty() && !direct.empty()) td = evo::trace_distance(spectral[i], direct[i]);
    if (!spectral.empty())
      rows.push_back({times[i], "spectral", evo::observables(spectral[i], cfg.Nc, cfg.Nm), td});
    if (!direct.empty())
      rows.push_back({times[i], "direct", evo::observables(direct[i], cfg.Nc, cfg.Nm), td});
  }

  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "t,method,photon_number,phonon_number,mech_quadrature,purity,re_trace,im_trace,trace_distance\n";
    for (const auto& r : rows) {
      os << fmt_double(r.t) << ',' << r.method << ',' << fmt_double(r.obs.photon_number) << ','
         << fmt_double(r.obs.phonon_number) << ',' << fmt_double(r.obs.mech_quadrature) << ','
         << fmt_double(r.obs.purity) << ',' << fmt_double(r.obs.trace.real()) << ','
         << fmt_double(r.obs.trace.imag()) << ',';
      if (r.trace_distance >= 0.0) os << fmt_double(r.trace_distance);
      os << '\n';
    }
    write_output(os.str(), out_path);
  } else {
    json doc{{"schema", "odb.evolve.v1"},
             {"params", params_json(cfg.params)},
             {"initial", initial},
             {"method", method},
             {"rows", json::array()},
             {"metadata", json{{"reconstruction_error", recon_err}, {"warnings", json::array()}}}};
    if (method != "direct" && recon_err > 1e-4)
      doc["metadata"]["warnings"].push_back(
          "t=0 reconstruction error " + fmt_double(recon_err) +
          " exceeds 1e-4; enlarge the label set or dimensions");
    for (const auto& r : rows) {
      json row{{"t", r.t},
               {"method", r.method},
               {"photon_number", r.obs.photon_number},
               {"phonon_number", r.obs.phonon_number},
               {"mech_quadrature", r.obs.mech_quadrature},
               {"purity", r.obs.purity},
               {"trace", cplx_json(r.obs.trace)}};
      row["trace_distance"] = r.trace_distance >= 0.0 ? json(r.trace_distance) : json(nullptr);
      doc["rows"].push_back(std::move(row));
    }
    write_output(doc.dump(2), out_path);
  }
  return 0;
}

// ------------------------------------------------------------------ bench

int cmd_bench(const RunConfig& cfg, const std::string& dims_s, const std::string& times_s,
              const std::string& initial, const std::string& out_path) {
  const auto times = parse_nums(times_s);
  for (size_t i = 0; i < times.size(); ++i)
    if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1]))
      throw ConfigError("times must be sorted and nonnegative");

  struct Dim { int Nc, Nm; };
  std::vector<Dim> dims;
  std::stringstream ss(dims_s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto x = tok.find('x');
    if (x == std::string::npos) throw ConfigError("bad dims entry (want NCxNM): " + tok);
    dims.push_back({std::stoi(tok.substr(0, x)), std::stoi(tok.substr(x + 1))});
  }
  if (dims.empty()) throw ConfigError("empty dims list");

  using clock = std::chrono::steady_clock;
  auto ms = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };

  struct Row { int Nc, Nm; std::string method; double setup_ms, per_point_ms, max_error; };
  std::vector<Row> rows;

  for (const auto& d : dims) {
    if (d.Nc < 1 || d.Nm < 1 || d.Nc * d.Nm > 4096)
      throw ConfigError("bench: dimension out of range");
    const cmat rho0 = parse_initial(initial, d.Nc, d.Nm);
    auto t0 = clock::now();
    sop::SuperOp L = sop::build_liouvillian(cfg.params, d.Nc, d.Nm);
    auto t1 = clock::now();
    const double setup_L = ms(t0, t1);  // both direct methods need the superoperator

    // baseline: matrix exponential
    t0 = clock::now();
    auto ref = oracle::direct_evolve(L, rho0, times);
    t1 = clock::now();
    rows.push_back({d.Nc, d.Nm, "expm", setup_L, ms(t0, t1) / (double)times.size(), 0.0});

    // spectral
    t0 = clock::now();
    auto dec = evo::decompose(rho0, evo::default_label_set(d.Nc, cfg.m_max), cfg.params, d.Nc, d.Nm);
    t1 = clock::now();
    auto states = evo::evolve_many(dec, times);
    auto t2 = clock::now();
    double err = 0.0;
    for (size_t i = 0; i < times.size(); ++i)
      err = std::max(err, evo::trace_distance(states[i], ref[i]));
    rows.push_back({d.Nc, d.Nm, "spectral", ms(t0, t1), ms(t1, t2) / (double)times.size(), err});

    // adaptive integrator
    oracle::DirectOptions opt;
    opt.method = oracle::Method::adaptive;
    t0 = clock::now();
    auto adap = oracle::direct_evolve(L, rho0, times, opt);
    t1 = clock::now();
    err = 0.0;
    for (size_t i = 0; i < times.size(); ++i)
      err = std::max(err, evo::trace_distance(adap[i], ref[i]));
    rows.push_back({d.Nc, d.Nm, "adaptive", setup_L, ms(t0, t1) / (double)times.size(), err});
  }

  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "Nc,Nm,method,setup_ms,per_time_point_ms,max_error\n";
    for (const auto& r : rows)
      os << r.Nc << ',' << r.Nm << ',' << r.method << ',' << fmt_double(r.setup_ms) << ','
         << fmt_double(r.per_point_ms) << ',' << fmt_double(r.max_error) << '\n';
    write_output(os.str(), out_path);
  } else {
    json doc{{"schema", "odb.bench.v1"}, {"params", params_json(cfg.params)}, {"rows", json::array()}};
    for (const auto& r : rows)
      doc["rows"].push_back(json{{"Nc", r.Nc}, {"Nm", r.Nm}, {"method", r.method},
                                 {"setup_ms", r.setup_ms}, {"per_time_point_ms", r.per_point_ms},
                                 {"max_error", r.max_error}});
    write_output(doc.dump(2), out_path);
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"analytic damping-basis toolkit for the dissipative optomechanical Liouvillian"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, variant_s, format_s, out_path;
  std::uint64_t seed = 0;
  int jobs = -1;
  app.add_option("--config", config_path, "JSON config file (flags override file values)");
  app.add_option("--variant", variant_s, "weak|dsme")->check(CLI::IsMember({"weak", "dsme"}));
  app.add_option("--format", format_s, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", out_path, "write output to this path instead of stdout");
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized checks");
  auto* jobs_opt = app.add_option("--jobs", jobs, "worker threads (0 = library default)");

  auto* sub_spectrum = app.add_subcommand("spectrum", "emit analytic eigenvalues over the label ranges");
  auto* sub_eigvec = app.add_subcommand("eigvec", "emit one eigenvector's mechanical blocks");
  int ev_l = 0, ev_n = 0, ev_k = 0, ev_m = 0;
  std::string ev_side = "right";
  bool ev_pathsum = false;
  sub_eigvec->add_option("--l", ev_l, "photon coherence index");
  sub_eigvec->add_option("--n", ev_n, "photon excitation index");
  sub_eigvec->add_option("--k", ev_k, "mechanical coherence index");
  sub_eigvec->add_option("--m", ev_m, "mechanical excitation index");
  sub_eigvec->add_option("--side", ev_side, "right|left")->check(CLI::IsMember({"right", "left"}));
  sub_eigvec->add_flag("--pathsum", ev_pathsum, "use the path-sum construction");

  auto* sub_verify = app.add_subcommand("verify", "run the analytic-vs-numeric check suite");

  auto* sub_evolve = app.add_subcommand("evolve", "evolve an initial state and tabulate observables");
  std::string evo_initial = "fock:1,0", evo_times = "0,0.5,1,2,5";
  std::string evo_method = "spectral", evo_integrator = "expm";
  sub_evolve->add_option("--initial", evo_initial, "initial state spec (see docs)");
  sub_evolve->add_option("--times", evo_times, "comma-separated sorted time points");
  sub_evolve->add_option("--method", evo_method, "spectral|direct|both");
  sub_evolve->add_option("--integrator", evo_integrator, "direct method: expm|adaptive");

  auto* sub_bench = app.add_subcommand("bench", "compare evolution methods across dimensions");
  std::string bench_dims = "3x8,3x12,4x12", bench_times = "0.5,1,2", bench_initial = "fock:1,0";
  sub_bench->add_option("--dims", bench_dims, "comma-separated NCxNM list");
  sub_bench->add_option("--times", bench_times, "comma-separated sorted time points");
  sub_bench->add_option("--initial", bench_initial, "initial state spec");

  // lets `odb spectrum --config x` find the global options as well
  for (auto* sub : {sub_spectrum, sub_eigvec, sub_verify, sub_evolve, sub_bench})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) load_config_file(config_path, cfg);
    if (!variant_s.empty()) cfg.params.variant = parse_variant(variant_s);
    if (!format_s.empty()) cfg.format = format_s;
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (jobs_opt->count() > 0) cfg.jobs = jobs;
    cfg.validate();
#ifdef _OPENMP
    if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);
#endif

    try {
      if (sub_spectrum->parsed()) return cmd_spectrum(cfg, out_path);
      if (sub_eigvec->parsed())
        return cmd_eigvec(cfg, ev_l, ev_n, ev_k, ev_m, ev_side, ev_pathsum, out_path);
      if (sub_verify->parsed()) return cmd_verify(cfg, out_path);
      if (sub_evolve->parsed())
        return cmd_evolve(cfg, evo_initial, evo_times, evo_method, evo_integrator, out_path);
      if (sub_bench->parsed())
        return cmd_bench(cfg, bench_dims, bench_times, bench_initial, out_path);
      std::cerr << "no subcommand selected\n";
      return 2;
    } catch (const ConfigError&) {
      throw;  // config problems keep exit code 2 even when detected late
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace odb::cli
