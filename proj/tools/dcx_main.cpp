#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "dcx/parse.hpp"
#include "dcx/reduction.hpp"
#include "dcx/residual.hpp"
#include "dcx/symmetry.hpp"
#include "dcx/transforms.hpp"

using namespace dcx;

namespace {

constexpr const char* kLastRunFile = ".dcx-last-run.json";

std::string default_catalog() {
  if (const char* env = std::getenv("DCX_CATALOG")) return env;
  return "data/catalog.dcx";
}

struct RunOutcome {
  std::vector<VerificationReport> reports;
  std::vector<std::pair<std::string, bool>> matches;  // entry, matched
};

int finish_run(const RunOutcome& run, uint64_t seed, const std::string& out_path,
               bool quiet = false) {
  json j = aggregate_reports(run.reports, seed, /*with_timestamp=*/true);
  json mism = json::array();
  for (auto& [id, okflag] : run.matches)
    if (!okflag) mism.push_back(id);
  j["mismatches"] = mism;
  {
    std::ofstream out(kLastRunFile);
    out << j.dump(2) << "\n";
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << j.dump(2) << "\n";
  }
  if (!quiet) {
    std::map<std::string, int> counts;
    for (auto& r : run.reports) counts[to_string(r.status)]++;
    for (auto& [k, v] : counts) std::cout << k << ": " << v << "\n";
    if (!mism.empty()) {
      std::cout << "expected-status mismatches:";
      for (auto& m : mism) std::cout << " " << m.get<std::string>();
      std::cout << "\n";
    } else {
      std::cout << "all checks matched their expected status\n";
    }
  }
  return mism.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"catalog verification engine for diffusion-convection equations"};
  app.require_subcommand(1);

  std::string catalog_path = default_catalog();
  uint64_t seed = 7;
  double tol = 1e-8;
  int samples = 32;
  std::string out_path;

  // verify
  auto* verify = app.add_subcommand("verify", "residual-check cataloged solutions");
  std::string entry_id;
  bool all = false;
  verify->add_option("--catalog", catalog_path, "catalog path");
  verify->add_option("--entry", entry_id, "single entry id");
  verify->add_flag("--all", all, "verify every entry");
  verify->add_option("--seed", seed, "PRNG seed");
  verify->add_option("--tol", tol, "residual tolerance");
  verify->add_option("--samples", samples, "accepted samples per draw");
  verify->add_option("--out", out_path, "write the JSON report here");

  // symmetry
  auto* symmetry = app.add_subcommand("symmetry", "check Lie symmetry generators");
  std::string eq_id;
  bool sym_all = false;
  symmetry->add_option("--catalog", catalog_path, "catalog path");
  symmetry->add_option("--equation", eq_id, "restrict to one equation id");
  symmetry->add_flag("--all", sym_all, "check every cataloged generator");
  symmetry->add_option("--seed", seed, "PRNG seed");
  symmetry->add_option("--out", out_path, "write the JSON report here");

  // reduce
  auto* reduce = app.add_subcommand("reduce", "check ansatz/reduced-ODE rows");
  std::string row_id;
  bool red_all = false;
  reduce->add_option("--catalog", catalog_path, "catalog path");
  reduce->add_option("--row", row_id, "single row id");
  reduce->add_flag("--all", red_all, "check every row");
  reduce->add_option("--seed", seed, "PRNG seed");
  reduce->add_option("--out", out_path, "write the JSON report here");

  // transform
  auto* transform = app.add_subcommand("transform", "apply a cataloged mapping");
  std::string apply_id, input_id;
  std::vector<std::string> param_overrides;
  transform->add_option("--catalog", catalog_path, "catalog path");
  transform->add_option("--apply", apply_id, "transform id")->required();
  transform->add_option("--input", input_id, "input solution id")->required();
  transform->add_option("--param", param_overrides, "k=v parameter pins");
  transform->add_option("--seed", seed, "PRNG seed");
  transform->add_option("--out", out_path, "write the JSON report here");

  // generate
  auto* generate = app.add_subcommand("generate", "emit generated expressions");
  auto* gen_poly = generate->add_subcommand("heat-polynomial", "polynomial solution");
  int order = 1;
  bool odd = false;
  gen_poly->add_option("--order", order, "polynomial order m")->required();
  gen_poly->add_flag("--odd", odd, "odd family");
  auto* gen_chain = generate->add_subcommand("chain", "antiderivative chain from 1");
  int steps = 1;
  gen_chain->add_option("--steps", steps, "number of chain steps")->required();
  generate->require_subcommand(1);

  // report
  auto* report_cmd = app.add_subcommand("report", "aggregate the last run");
  std::string format_kind = "text";
  report_cmd->add_option("--format", format_kind, "json | text");
  report_cmd->add_option("--out", out_path, "write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) {
      if (gen_poly->parsed()) {
        std::cout << format(heat_polynomial(order, odd)) << "\n";
      } else {
        ExprPtr f = num(1);
        for (int i = 0; i < steps; ++i) f = chain_next(f);
        std::cout << format(f) << "\n";
      }
      return 0;
    }

    if (report_cmd->parsed()) {
      std::ifstream in(kLastRunFile);
      if (!in) {
        std::cerr << "no previous run found (" << kLastRunFile << " missing)\n";
        return 2;
      }
      json j;
      in >> j;
      std::ostream* os = &std::cout;
      std::ofstream fout;
      if (!out_path.empty()) {
        fout.open(out_path);
        os = &fout;
      }
      if (format_kind == "json") {
        *os << j.dump(2) << "\n";
      } else {
        *os << "seed " << j["seed"] << "\n";
        for (auto& [k, v] : j["summary"].items())
          *os << "  " << k << ": " << v << "\n";
        for (auto& r : j["reports"])
          *os << r["kind"].get<std::string>() << " "
              << r["entry"].get<std::string>() << ": "
              << r["status"].get<std::string>() << "\n";
      }
      return 0;
    }

    Catalog cat = load_catalog(catalog_path);
    RunOutcome run;

    if (verify->parsed()) {
      VerifyOptions opts;
      opts.seed = seed;
      opts.tolerance = tol;
      opts.samples = samples;
      if (!all && entry_id.empty()) {
        std::cerr << "verify needs --entry or --all\n";
        return 2;
      }
      if (!entry_id.empty()) {
        const SolutionEntry* found = nullptr;
        for (auto& s : cat.solutions)
          if (s.id == entry_id) found = &s;
        if (!found) {
          std::cerr << "no solution entry '" << entry_id << "'\n";
          return 2;
        }
        auto rep = verify_entry(cat, *found, opts);
        run.reports.push_back(rep);
        run.matches.emplace_back(found->id,
                                 status_matches(found->expected, rep.status));
      } else {
        for (auto& s : cat.solutions) {
          auto rep = verify_entry(cat, s, opts);
          run.matches.emplace_back(s.id, status_matches(s.expected, rep.status));
          run.reports.push_back(std::move(rep));
        }
      }
      return finish_run(run, seed, out_path);
    }

    if (symmetry->parsed()) {
      for (auto& vf : cat.vectorfields) {
        if (!sym_all && !eq_id.empty() && vf.equation != eq_id) continue;
        if (!sym_all && eq_id.empty()) {
          std::cerr << "symmetry needs --equation or --all\n";
          return 2;
        }
        auto rep = check_field(cat, vf, seed);
        run.matches.emplace_back(vf.id, rep.status == Status::Verified);
        run.reports.push_back(std::move(rep));
      }
      // closure per equation with >= 2 cataloged fields
      std::map<std::string, std::vector<const VectorFieldSpec*>> by_eq;
      for (auto& vf : cat.vectorfields) {
        if (!sym_all && vf.equation != eq_id) continue;
        by_eq[vf.equation].push_back(&vf);
      }
      for (auto& [eqid, fields] : by_eq) {
        if (fields.size() < 2) continue;
        auto ac = check_algebra(cat, cat.equation(eqid), fields, seed);
        VerificationReport rep;
        rep.entry = eqid + "/closure";
        rep.kind = "symmetry";
        rep.seed = seed;
        rep.status = ac.closure_pass ? Status::Verified : Status::Refuted;
        double worst = 0;
        for (auto& ce : ac.commutators)
          worst = std::max(worst, ce.closure_residual);
        rep.max_rel_residual = worst;
        run.matches.emplace_back(rep.entry, ac.closure_pass);
        run.reports.push_back(std::move(rep));
      }
      return finish_run(run, seed, out_path);
    }

    if (reduce->parsed()) {
      if (!red_all && row_id.empty()) {
        std::cerr << "reduce needs --row or --all\n";
        return 2;
      }
      for (auto& row : cat.reductions) {
        if (!red_all && row.id != row_id) continue;
        auto rep = check_reduction(cat, row, seed);
        run.matches.emplace_back(row.id, rep.status == Status::Verified);
        run.reports.push_back(std::move(rep));
      }
      for (auto& row : cat.ansatz_systems) {
        if (!red_all && row.id != row_id) continue;
        auto rep = verify_functional_ansatz(cat, row, seed);
        run.matches.emplace_back(row.id, rep.status == Status::Verified);
        run.reports.push_back(std::move(rep));
      }
      if (red_all)
        for (auto& rep : verify_reduced_ode_solutions(seed)) {
          run.matches.emplace_back(rep.entry, rep.status == Status::Verified);
          run.reports.push_back(rep);
        }
      if (run.reports.empty()) {
        std::cerr << "no reduction row '" << row_id << "'\n";
        return 2;
      }
      return finish_run(run, seed, out_path);
    }

    if (transform->parsed()) {
      const PointTransformSpec* tr = nullptr;
      for (auto& t : cat.transforms)
        if (t.id == apply_id) tr = &t;
      if (!tr) {
        std::cerr << "no transform '" << apply_id << "'\n";
        return 2;
      }
      PointTransformSpec pinned = *tr;
      pinned.push_src = input_id;
      pinned.push_tgt.clear();
      for (auto& kv : param_overrides) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos) {
          std::cerr << "--param expects k=v\n";
          return 2;
        }
        ParamConstraint pc;
        pc.name = kv.substr(0, eq);
        pc.discrete = true;
        pc.choices = {std::stod(kv.substr(eq + 1))};
        pinned.params = merge_constraints(pinned.params, {pc});
      }
      const SolutionEntry& src = cat.solution(input_id);
      if (src.form != SolForm::Explicit) {
        std::cerr << "input solution must be explicit\n";
        return 2;
      }
      ExprPtr img = apply_point_transform(pinned, src.U);
      std::cout << format(img) << "\n";
      auto rep = check_transform(cat, pinned, seed);
      run.matches.emplace_back(pinned.id, status_matches(pinned.expected, rep.status));
      run.reports.push_back(std::move(rep));
      return finish_run(run, seed, out_path, /*quiet=*/false);
    }
  } catch (const CatalogError& e) {
    std::cerr << "catalog error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
