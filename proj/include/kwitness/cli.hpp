#pragma once

// Command-line front end. Exit codes: 0 success / accepted, 1 semantic
// failure (invalid instance, reduction failure, rejected certificate, failed
// suite), 2 usage or parse errors.

#include "kwitness/certificate.hpp"
#include "kwitness/corpus.hpp"
#include "kwitness/io.hpp"
#include "kwitness/nil.hpp"
#include "kwitness/selftest.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

namespace kwitness {
namespace cli {

namespace detail {

inline std::string sibling_path(const std::string& input, const std::string& suffix) {
  std::filesystem::path p(input);
  std::string stem = p.stem().string();
  return (p.parent_path() / (stem + suffix)).string();
}

inline int cmd_validate(const std::string& file, bool quiet) {
  NilMulticomplex inst = io::load_instance(file);
  ValidationReport rep = validate_nil(inst);
  if (!quiet) {
    if (rep.pass) {
      std::cout << "valid: dimension " << inst.base.dimension << ", "
                << inst.base.positions().size() << " positions, "
                << (inst.nil_is_zero() ? "zero" : "nonzero") << " endomorphism\n";
    } else {
      std::cout << "invalid: " << rep.failures.size() << " failure(s)\n";
      size_t shown = 0;
      for (const auto& f : rep.failures) {
        std::cout << "  " << fail_kind_name(f.kind) << ": " << f.detail << "\n";
        if (++shown == 10 && rep.failures.size() > 10) {
          std::cout << "  ... " << (rep.failures.size() - 10) << " more\n";
          break;
        }
      }
    }
  }
  return rep.pass ? 0 : 1;
}

inline int cmd_reduce(const std::string& file, const std::string& strategy,
                      const std::string& out) {
  NilMulticomplex inst = io::load_instance(file);
  if (inst.base.dimension > 2) {
    std::cerr << "reduce supports dimensions 0..2, got " << inst.base.dimension << "\n";
    return 2;
  }
  ValidationReport rep = validate_nil(inst);
  if (!rep.pass) {
    // a validating instance is a precondition, so this is a usage error
    std::cerr << "input instance is invalid: " << rep.summary() << "\n";
    return 2;
  }
  SplitStrategy strat = strategy_from_name(strategy);
  auto result = reduce_nil_generator(inst, strat);
  if (auto* cert = std::get_if<Certificate>(&result)) {
    std::string path = out.empty() ? sibling_path(file, ".cert.json") : out;
    io::save_text(path, io::dump(io::certificate_to_json(*cert)));
    std::cout << "certificate: " << path << " (" << cert->steps.size() << " steps, "
              << cert->registry.order.size() << " objects)\n";
    return 0;
  }
  const auto& rf = std::get<ReductionFailure>(result);
  std::string path = out.empty() ? sibling_path(file, ".failure.json") : out;
  io::save_text(path, io::dump(io::failure_report_to_json(rf)));
  std::cerr << "reduction failed: " << rf.summary() << "\n";
  std::cerr << "failure report: " << path << "\n";
  return 1;
}

inline int cmd_verify(const std::string& file, bool quiet) {
  Certificate cert = io::load_certificate(file);
  Verdict v = verify_certificate(cert);
  if (v.accepted) {
    if (!quiet) {
      std::cout << "accepted: claim " << cert.claim.str() << " over " << cert.ring.name() << " ("
                << cert.steps.size() << " steps replayed)\n";
    }
    return 0;
  }
  if (!quiet) std::cout << "rejected: " << v.failure << "\n";
  return 1;
}

inline int cmd_gen(uint64_t seed, int dim, int count, const std::string& out_dir, int rank_bound,
                   int entry_bound, const std::string& prime) {
  if (dim < 0 || dim > 2) {
    std::cerr << "gen supports --dim 0, 1 or 2\n";
    return 2;
  }
  if (count < 1) {
    std::cerr << "--count must be positive\n";
    return 2;
  }
  RingSpec ring = prime.empty() ? RingSpec::integers() : RingSpec::localized_at(BigInt(prime));
  std::filesystem::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    uint64_t s = derive_seed(seed, static_cast<uint64_t>(i));
    NilMulticomplex inst;
    if (dim == 0) {
      Rng rng(s);
      int r = static_cast<int>(rng.uniform(1, std::max(1, rank_bound)));
      inst = nil_single(ring, random_nilpotent(rng, r, ring));
    } else {
      BinaryMulticomplex cpx = random_acyclic_binary(s, dim, rank_bound, entry_bound, ring);
      if (i % 3 == 2) {
        inst = shift_nil(cpx);
      } else {
        auto samples = commutant_nilpotent_sample(cpx, derive_seed(s, 1), 16);
        inst = samples.front();
        for (const auto& cand : samples)
          if (!cand.nil_is_zero()) {
            inst = cand;
            break;
          }
      }
    }
    ValidationReport rep = validate_nil(inst);
    if (!rep.pass)
      throw InternalInvariantViolation("gen produced an invalid instance: " + rep.summary());
    std::ostringstream name;
    name << "instance_" << std::setw(3) << std::setfill('0') << i << ".json";
    std::filesystem::path path = std::filesystem::path(out_dir) / name.str();
    io::save_text(path.string(), io::dump(io::instance_to_json(inst)));
    std::cout << path.string() << "\n";
  }
  return 0;
}

inline int cmd_selftest(const std::string& suite, uint64_t seed) {
  selftest::SuiteResult r = selftest::run_suite(suite, seed);
  std::cout << r.name << ": " << (r.pass ? "pass" : "fail") << " (" << std::fixed
            << std::setprecision(2) << r.seconds << " s)\n";
  for (const auto& n : r.notes) std::cout << "  " << n << "\n";
  if (!r.counters.empty()) {
    std::cout << " ";
    for (const auto& [k, v] : r.counters) std::cout << " " << k << "=" << v;
    std::cout << "\n";
  }
  return r.pass ? 0 : 1;
}

}  // namespace detail

inline int run(std::vector<std::string> args) {
  CLI::App app{"binary multicomplex validation and vanishing certificates"};
  app.require_subcommand(1);

  std::string v_file;
  bool v_quiet = false;
  auto* validate = app.add_subcommand("validate", "validate an instance file");
  validate->add_option("file", v_file, "instance JSON")->required();
  validate->add_flag("--quiet", v_quiet, "suppress the report, exit code only");

  std::string r_file, r_out, r_strategy = "max-index";
  auto* reduce = app.add_subcommand("reduce", "reduce an instance to a vanishing certificate");
  reduce->add_option("file", r_file, "instance JSON")->required();
  reduce->add_option("--strategy", r_strategy, "splitting strategy")
      ->check(CLI::IsMember({"max-index", "paper-min-index"}));
  reduce->add_option("--out", r_out, "output path (default: <input>.cert.json)");

  std::string y_file;
  bool y_quiet = false;
  auto* verify = app.add_subcommand("verify", "verify a certificate file");
  verify->add_option("file", y_file, "certificate JSON")->required();
  verify->add_flag("--quiet", y_quiet, "suppress the verdict line, exit code only");

  uint64_t g_seed = 1;
  int g_dim = 0, g_count = 1, g_rank = 3, g_entry = 2;
  std::string g_out = ".", g_prime;
  auto* gen = app.add_subcommand("gen", "generate instance files");
  gen->add_option("--seed", g_seed, "generator seed");
  gen->add_option("--dim", g_dim, "dimension (0, 1 or 2)")->required();
  gen->add_option("--count", g_count, "number of instances");
  gen->add_option("--out", g_out, "output directory")->required();
  gen->add_option("--rank-bound", g_rank, "rank bound per position");
  gen->add_option("--entry-bound", g_entry, "entry bound for differentials");
  gen->add_option("--prime", g_prime, "localize the ring at this prime");

  std::string s_suite;
  uint64_t s_seed = 1;
  auto* selftest = app.add_subcommand("selftest", "run a deterministic self-test suite");
  selftest->add_option("--suite", s_suite, "suite name")
      ->required()
      ->check(CLI::IsMember(selftest::suite_names()));
  selftest->add_option("--seed", s_seed, "suite seed");

  std::vector<const char*> argv;
  argv.push_back("kwitness");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*validate) return detail::cmd_validate(v_file, v_quiet);
    if (*reduce) return detail::cmd_reduce(r_file, r_strategy, r_out);
    if (*verify) return detail::cmd_verify(y_file, y_quiet);
    if (*gen) return detail::cmd_gen(g_seed, g_dim, g_count, g_out, g_rank, g_entry, g_prime);
    if (*selftest) return detail::cmd_selftest(s_suite, s_seed);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace cli
}  // namespace kwitness
