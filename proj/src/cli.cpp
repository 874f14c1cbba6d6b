#include "beamcap/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "beamcap/fading.hpp"
#include "beamcap/io_json.hpp"
#include "beamcap/oracle.hpp"
#include "beamcap/parallel.hpp"
#include "beamcap/solver.hpp"
#include "beamcap/validation.hpp"

namespace beamcap::cli {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

std::vector<double> parse_csv_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty numeric list");
  return out;
}

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

PowerBudget make_budget(double tp, double pa, const std::string& pa_list, std::size_t m) {
  if (!pa_list.empty()) {
    if (pa > 0.0) throw std::invalid_argument("--pa and --pa-list are mutually exclusive");
    auto limits = parse_csv_doubles(pa_list);
    if (limits.size() != m) {
      throw std::invalid_argument("--pa-list length does not match the channel");
    }
    return PowerBudget::heterogeneous(tp, std::move(limits));
  }
  if (!(pa > 0.0)) throw std::invalid_argument("one of --pa or --pa-list is required");
  return PowerBudget::uniform(tp, pa);
}

// Capacity with every per-antenna constraint active; reduces to
// ln(1 + P |h|_1^2) for uniform budgets.
double egt_capacity_generalized(const ChannelVector& h, const PowerBudget& budget) {
  if (budget.uniform_limits()) return capacity_egt(h, budget.shared_limit());
  double gain = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    gain += std::sqrt(budget.limit(i)) * h.magnitudes()[i];
  }
  return std::log1p(gain * gain);
}

struct SweepRow {
  double p_t = 0.0;
  double c_joint = 0.0, c_mrt = 0.0, c_egt = 0.0, c_approx = 0.0;
  std::size_t k = 0;
  std::vector<double> amplitudes;
};

std::vector<SweepRow> run_sweep(const ChannelVector& h, double pa, const std::string& pa_list,
                                const std::vector<double>& grid) {
  // Budget inputs are validated here, before work moves onto worker threads.
  make_budget(grid.front(), pa, pa_list, h.size());
  std::vector<SweepRow> rows(grid.size());
  parallel_for(grid.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double tp = grid[i];
      const PowerBudget budget = make_budget(tp, pa, pa_list, h.size());
      const BeamformingSolution sol = solve(h, budget);
      SweepRow& r = rows[i];
      r.p_t = tp;
      r.c_joint = sol.capacity_nats;
      r.c_mrt = capacity_mrt(h, tp);
      r.c_egt = egt_capacity_generalized(h, budget);
      r.c_approx = std::min(r.c_mrt, r.c_egt);
      r.k = sol.k;
      r.amplitudes = sol.amplitudes;
    }
  });
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::string& channel_path,
                     const std::string& pa_desc, bool bits, const std::vector<SweepRow>& rows,
                     std::size_t m) {
  const double unit = bits ? 1.0 / kLn2 : 1.0;
  os << "# beamcap sweep\n";
  os << "# channel: " << channel_path << "\n";
  os << "# pa: " << pa_desc << "\n";
  os << "# units: " << (bits ? "bits" : "nats") << "\n";
  os << "P_T,C_joint,C_MRT,C_EGT,C_approx,k";
  for (std::size_t i = 1; i <= m; ++i) os << ",a_" << i;
  os << "\n";
  for (const SweepRow& r : rows) {
    os << fmt12(r.p_t) << ',' << fmt12(r.c_joint * unit) << ',' << fmt12(r.c_mrt * unit) << ','
       << fmt12(r.c_egt * unit) << ',' << fmt12(r.c_approx * unit) << ',' << r.k;
    for (const double a : r.amplitudes) os << ',' << fmt12(a);
    os << "\n";
  }
}

// Minimal static line chart of the sweep capacities. Best effort only.
void write_sweep_svg(std::ostream& os, const std::vector<SweepRow>& rows) {
  const double w = 800, hgt = 500, ml = 60, mr = 20, mt = 20, mb = 45;
  double x0 = rows.front().p_t, x1 = rows.back().p_t;
  double y0 = 0.0, y1 = 0.0;
  for (const SweepRow& r : rows) {
    y1 = std::max({y1, r.c_joint, r.c_mrt, r.c_egt});
  }
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = 1.0;
  const auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
  const auto py = [&](double y) { return hgt - mb - (y - y0) / (y1 - y0) * (hgt - mt - mb); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << hgt
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << px(x0) << "\" y1=\"" << py(y0) << "\" x2=\"" << px(x1) << "\" y2=\""
     << py(y0) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << px(x0) << "\" y1=\"" << py(y0) << "\" x2=\"" << px(x0) << "\" y2=\""
     << py(y1) << "\" stroke=\"black\"/>\n";
  struct Series {
    const char* name;
    const char* color;
    double SweepRow::* field;
  };
  const Series series[] = {{"C_joint", "#1f77b4", &SweepRow::c_joint},
                           {"C_MRT", "#d62728", &SweepRow::c_mrt},
                           {"C_EGT", "#2ca02c", &SweepRow::c_egt},
                           {"C_approx", "#9467bd", &SweepRow::c_approx}};
  int label = 0;
  for (const Series& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (const SweepRow& r : rows) os << px(r.p_t) << ',' << py(r.*(s.field)) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 15 * (label + 1) << "\" fill=\"" << s.color
       << "\" font-size=\"12\">" << s.name << "</text>\n";
    ++label;
  }
  os << "<text x=\"" << w / 2 << "\" y=\"" << hgt - 10
     << "\" font-size=\"12\" text-anchor=\"middle\">P_T</text>\n";
  os << "</svg>\n";
}

json verify_report_to_json(const VerifyReport& rep) {
  json out{{"pass", rep.pass},
           {"instances", rep.instances},
           {"seed", rep.seed},
           {"max_m", rep.max_m},
           {"worst_snr_gap", rep.worst_snr_gap},
           {"worst_rm_residual", rep.worst_rm_residual},
           {"oracle_failures", rep.oracle_failures},
           {"kkt_failures", rep.kkt_failures},
           {"k_search_failures", rep.k_search_failures},
           {"negative_controls", json{{"constructed", rep.control_total},
                                      {"caught", rep.control_caught}}}};
  if (rep.grid_cases > 0) {
    out["grid"] = json{{"cases", rep.grid_cases}, {"worst_excess", rep.worst_grid_excess}};
  }
  if (rep.failing) {
    out["failing_check"] = rep.failing_check;
    out["failing_instance"] = instance_to_json(*rep.failing);
  }
  return out;
}

int cmd_solve(const std::string& channel_path, double tp, double pa, const std::string& pa_list,
              bool bits, std::ostream& out) {
  const ChannelVector h = channel_from_json(read_json_file(channel_path));
  const PowerBudget budget = make_budget(tp, pa, pa_list, h.size());
  const BeamformingSolution sol = solve(h, budget);
  const KktCertificate cert = certify_solution(h, sol, budget);
  json j = solution_to_json(sol, bits);
  j["kkt"] = certificate_to_json(cert);
  out << j.dump(2) << "\n";
  return cert.pass ? 0 : 2;
}

int cmd_verify_replay(const std::string& path, std::ostream& out) {
  const RandomInstance inst = instance_from_json(read_json_file(path));
  VerifyOptions options;
  options.check_grid = inst.h.size() == 2 && inst.h.nonzero_count() == 2;
  const InstanceCheck check = check_instance(inst, options);
  const BeamformingSolution sol = solve(inst.h, inst.budget);
  json j{{"instance", instance_to_json(inst)},
         {"solution", solution_to_json(sol, false)},
         {"kkt", certificate_to_json(certify_solution(inst.h, sol, inst.budget))},
         {"oracle_ok", check.oracle_ok},
         {"kkt_ok", check.kkt_ok},
         {"k_search_ok", check.k_search_ok},
         {"snr_gap", check.snr_gap},
         {"controls", json{{"constructed", check.controls_attempted},
                           {"caught", check.controls_caught}}}};
  const bool pass = check.oracle_ok && check.kkt_ok && check.k_search_ok &&
                    check.controls_attempted == check.controls_caught;
  j["pass"] = pass;
  out << j.dump(2) << "\n";
  return pass ? 0 : 2;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Capacity and optimal beamforming of Gaussian MISO channels under joint "
               "total and per-antenna power constraints"};
  app.name("beamcap");
  app.require_subcommand(1);

  // solve
  std::string channel_path, pa_list;
  double tp = 0.0, pa = 0.0;
  bool bits = false;
  std::uint64_t seed = 0;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one channel instance and certify it");
  solve_cmd->add_option("--channel", channel_path, "Channel JSON file")->required();
  solve_cmd->add_option("--tp", tp, "Total power cap P_T")->required();
  solve_cmd->add_option("--pa", pa, "Shared per-antenna power cap P");
  solve_cmd->add_option("--pa-list", pa_list, "Comma-separated per-antenna caps");
  solve_cmd->add_flag("--bits", bits, "Report capacity in bits instead of nats");
  solve_cmd->add_option("--seed", seed, "Random seed (unused by solve)");

  // sweep
  std::string sweep_channel, sweep_pa_list, out_path, svg_path, tp_list;
  double sweep_pa = 0.0, tp_start = 0.0, tp_stop = 0.0, tp_step = 0.0;
  bool sweep_bits = false;
  std::uint64_t sweep_seed = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Capacity and amplitudes over a P_T grid (CSV)");
  sweep_cmd->add_option("--channel", sweep_channel, "Channel JSON file")->required();
  sweep_cmd->add_option("--pa", sweep_pa, "Shared per-antenna power cap P");
  sweep_cmd->add_option("--pa-list", sweep_pa_list, "Comma-separated per-antenna caps");
  sweep_cmd->add_option("--tp-start", tp_start, "Grid start");
  sweep_cmd->add_option("--tp-stop", tp_stop, "Grid stop");
  sweep_cmd->add_option("--tp-step", tp_step, "Grid step");
  sweep_cmd->add_option("--tp-list", tp_list, "Explicit comma-separated P_T grid");
  sweep_cmd->add_option("--out", out_path, "Output CSV path")->required();
  sweep_cmd->add_option("--svg", svg_path, "Optional SVG chart path");
  sweep_cmd->add_flag("--bits", sweep_bits, "Capacities in bits");
  sweep_cmd->add_option("--seed", sweep_seed, "Random seed (unused by sweep)");

  // verify
  VerifyOptions vopt;
  std::string replay_path;
  bool sel_oracle = false, sel_kkt = false, sel_ksearch = false, sel_grid = false;
  auto* verify_cmd =
      app.add_subcommand("verify", "Randomized oracle, KKT and k-search validation");
  verify_cmd->add_option("--instances", vopt.instances, "Number of random instances");
  verify_cmd->add_option("--seed", vopt.seed, "Random seed");
  verify_cmd->add_option("--max-m", vopt.max_m, "Largest antenna count");
  verify_cmd->add_option("--tol", vopt.snr_tol, "Oracle SNR agreement tolerance");
  verify_cmd->add_flag("--oracle", sel_oracle, "Run only the oracle-equivalence check");
  verify_cmd->add_flag("--kkt", sel_kkt, "Run only the KKT certification check");
  verify_cmd->add_flag("--k-search", sel_ksearch, "Run only the active-count scan validation");
  verify_cmd->add_flag("--oracle-grid", sel_grid, "Add the m=2 exhaustive complex grid check");
  verify_cmd->add_option("--replay", replay_path, "Re-run one serialized failing instance");

  // ergodic
  std::string model_name = "iid", rr_path, rt_path, lam_list;
  int n_rx = 1, m_tx = 1;
  double erg_pa = 0.0, erg_tp = 0.0;
  std::size_t samples = 10000;
  std::uint64_t erg_seed = 0;
  bool erg_bits = false, dominance = false, counterexample = false;
  auto* erg_cmd = app.add_subcommand("ergodic", "Monte Carlo ergodic capacity of fading MIMO");
  erg_cmd->add_option("--model", model_name, "iid | semi | txcorr")
      ->check(CLI::IsMember({"iid", "semi", "txcorr"}));
  erg_cmd->add_option("--rx", n_rx, "Receive antennas");
  erg_cmd->add_option("--tx", m_tx, "Transmit antennas");
  erg_cmd->add_option("--rr", rr_path, "Receive correlation matrix JSON (semi)");
  erg_cmd->add_option("--rt", rt_path, "Transmit correlation matrix JSON (txcorr)");
  erg_cmd->add_option("--pa", erg_pa, "Per-antenna power cap P")->required();
  erg_cmd->add_option("--tp", erg_tp, "Total power cap P_T")->required();
  erg_cmd->add_option("--samples", samples, "Monte Carlo samples");
  erg_cmd->add_option("--seed", erg_seed, "Random seed");
  erg_cmd->add_flag("--bits", erg_bits, "Capacities in bits");
  erg_cmd->add_flag("--dominance", dominance, "Isotropic-vs-diagonal paired comparison");
  erg_cmd->add_option("--lam", lam_list, "Diagonal for --dominance (default: all power on one "
                                         "antenna)");
  erg_cmd->add_flag("--counterexample", counterexample,
                    "Transmit-correlated control case: concentrated vs isotropic");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("beamcap");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "beamcap: " << e.what() << "\n";
    return 1;
  }

  try {
    if (solve_cmd->parsed()) {
      return cmd_solve(channel_path, tp, pa, pa_list, bits, out);
    }

    if (sweep_cmd->parsed()) {
      const ChannelVector h = channel_from_json(read_json_file(sweep_channel));
      std::vector<double> grid;
      if (!tp_list.empty()) {
        grid = parse_csv_doubles(tp_list);
      } else {
        if (!(tp_step > 0.0) || !(tp_stop > tp_start)) {
          throw std::invalid_argument("sweep grid needs --tp-list or increasing start/stop/step");
        }
        for (std::size_t i = 0;; ++i) {
          const double v = tp_start + static_cast<double>(i) * tp_step;
          if (v > tp_stop + 1e-9 * tp_step) break;
          grid.push_back(v);
        }
      }
      if (grid.size() < 2) throw std::invalid_argument("sweep grid needs at least 2 points");
      for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
          throw std::invalid_argument("sweep grid must be strictly increasing");
        }
      }
      const auto rows = run_sweep(h, sweep_pa, sweep_pa_list, grid);
      std::ofstream csv(out_path, std::ios::binary);
      if (!csv) throw std::invalid_argument("cannot write output file: " + out_path);
      const std::string pa_desc = sweep_pa_list.empty() ? fmt12(sweep_pa) : sweep_pa_list;
      write_sweep_csv(csv, sweep_channel, pa_desc, sweep_bits, rows, h.size());
      if (!csv.good()) throw std::invalid_argument("write failed: " + out_path);
      if (!svg_path.empty()) {
        std::ofstream svg(svg_path, std::ios::binary);
        if (svg) write_sweep_svg(svg, rows);
      }
      return 0;
    }

    if (verify_cmd->parsed()) {
      if (!replay_path.empty()) return cmd_verify_replay(replay_path, out);
      if (sel_oracle || sel_kkt || sel_ksearch) {
        vopt.check_oracle = sel_oracle;
        vopt.check_kkt = sel_kkt;
        vopt.check_k_search = sel_ksearch;
        vopt.negative_controls = sel_kkt;
      }
      vopt.check_grid = sel_grid;
      const VerifyReport rep = run_verification(vopt);
      out << verify_report_to_json(rep).dump(2) << "\n";
      return rep.pass ? 0 : 2;
    }

    if (erg_cmd->parsed()) {
      if (counterexample) {
        const PairedComparison cmp =
            tx_correlated_counterexample(erg_tp, erg_pa, m_tx, n_rx, samples, erg_seed);
        out << comparison_to_json(cmp, "concentrated", "isotropic").dump(2) << "\n";
        return 0;
      }
      std::optional<FadingModel> model;
      if (model_name == "semi") {
        if (rr_path.empty()) throw std::invalid_argument("--model semi requires --rr");
        model = FadingModel::semi_correlated(complex_matrix_from_json(read_json_file(rr_path)),
                                             m_tx);
      } else if (model_name == "txcorr") {
        if (rt_path.empty()) throw std::invalid_argument("--model txcorr requires --rt");
        model = FadingModel::tx_correlated(n_rx, complex_matrix_from_json(read_json_file(rt_path)));
      } else {
        model = FadingModel::iid(n_rx, m_tx);
      }
      if (dominance) {
        if (!model->right_unitary_invariant()) {
          throw std::invalid_argument("--dominance requires a right unitary-invariant model");
        }
        Eigen::VectorXd lam = Eigen::VectorXd::Zero(model->m_tx());
        if (lam_list.empty()) {
          lam(0) = erg_tp;
        } else {
          const auto vals = parse_csv_doubles(lam_list);
          if (vals.size() != static_cast<std::size_t>(model->m_tx())) {
            throw std::invalid_argument("--lam length does not match the transmit count");
          }
          for (std::size_t i = 0; i < vals.size(); ++i) lam(static_cast<Eigen::Index>(i)) = vals[i];
        }
        const PairedComparison cmp = isotropic_dominance_test(*model, lam, samples, erg_seed);
        out << comparison_to_json(cmp, "isotropic", "candidate").dump(2) << "\n";
        return 0;
      }
      const double p_star = isotropic_power(erg_pa, erg_tp, model->m_tx());
      const ErgodicEstimate est =
          ergodic_capacity(*model, CovariancePolicy::isotropic(p_star), samples, erg_seed);
      out << estimate_to_json(est, erg_bits).dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    err << "beamcap: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace beamcap::cli
