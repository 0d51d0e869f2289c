// gabm: verify / sweep / list-families over JSON run configs.
// Exit codes: 0 all checks pass, 1 a check failed, 2 config error, 3 domain error.

#include <fstream>
#include <iostream>
#include <regex>

#include <CLI11.hpp>

#include "gabm/errors.hpp"
#include "gabm/scenario.hpp"

namespace {

int fail(int code, const std::string& msg) {
  std::cerr << "gabm: " << msg << '\n';
  return code;
}

std::string witness_text(const std::vector<double>& w) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < w.size(); ++i) os << (i ? ", " : "") << w[i];
  os << ')';
  return os.str();
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const gabm::ConfigError& e) {
    return fail(2, std::string("config error: ") + e.what());
  } catch (const gabm::InvalidInput& e) {
    return fail(2, std::string("invalid configuration: ") + e.what());
  } catch (const gabm::DomainError& e) {
    return fail(3, std::string("domain error: ") + e.what() +
                       (e.witness().empty() ? "" : " at " + witness_text(e.witness())));
  } catch (const nlohmann::json::exception& e) {
    return fail(2, std::string("config error: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for general (alpha, beta)-metrics"};
  app.require_subcommand(1);

  std::string config, report, quantity, grid, out;
  bool serial = false, timing = true;
  int points = 0;

  auto* verify = app.add_subcommand("verify", "run the checks named in a config and write a JSON report");
  verify->add_option("config", config, "config or scenario file")->required();
  verify->add_option("--report", report, "report path (default: $.output.report, else stdout)");
  verify->add_flag("--serial", serial, "use the serial reference kernels");
  verify->add_flag("!--no-timing", timing, "leave wall time out of the report");

  auto* sw = app.add_subcommand("sweep", "write residuals over a grid or sample set as CSV");
  sw->add_option("config", config, "config file")->required();
  sw->add_option("--quantity", quantity, "pde1 | pde2 | regularity | einstein | spray")->required();
  sw->add_option("--grid", grid, "phi grid as NxM");
  sw->add_option("--points", points, "sample count for einstein / spray");
  sw->add_option("--out", out, "CSV path (default: $.output.csv, else stdout)");
  sw->add_flag("--serial", serial, "use the serial reference kernels");

  app.add_subcommand("list-families", "list phi families, backends, deformations and checks");

  CLI11_PARSE(app, argc, argv);
  const gabm::Exec exec = serial ? gabm::Exec::serial : gabm::Exec::parallel;

  if (app.got_subcommand("list-families")) {
    std::cout << gabm::list_families();
    return 0;
  }

  if (app.got_subcommand("verify")) {
    return guarded([&] {
      const auto cases = gabm::expand_scenario(gabm::load_json(config));
      nlohmann::json doc = nlohmann::json::array();
      bool pass = true;
      std::string target = report;
      for (const auto& c : cases) {
        const gabm::RunResult r = gabm::run_config(c, exec);
        pass = pass && r.pass();
        doc.push_back(r.to_json(timing));
        for (const auto& k : r.checks)
          std::cerr << (k.pass ? "PASS " : "FAIL ") << r.name << ' ' << k.name << " max=" << k.max << " tol=" << k.tol
                    << '\n';
        if (target.empty() && c.contains("output") && c["output"].contains("report"))
          target = c["output"]["report"].get<std::string>();
      }
      const nlohmann::json payload = cases.size() == 1 ? doc[0] : doc;
      if (target.empty() || target == "-") {
        std::cout << payload.dump(2) << '\n';
      } else {
        std::ofstream f(target);
        if (!f) return fail(2, "cannot write report " + target);
        f << payload.dump(2) << '\n';
      }
      return pass ? 0 : 1;
    });
  }

  return guarded([&] {
    const nlohmann::json cfg = gabm::load_json(config);
    std::optional<std::pair<int, int>> g;
    if (!grid.empty()) {
      std::smatch m;
      if (!std::regex_match(grid, m, std::regex(R"((\d+)x(\d+))")))
        throw gabm::ConfigError("--grid", "expected NxM");
      g = std::pair{std::stoi(m[1]), std::stoi(m[2])};
      if (g->first < 2 || g->second < 2) throw gabm::ConfigError("--grid", "both sizes must be >= 2");
    }
    const gabm::SweepTable t =
        gabm::sweep(cfg, quantity, g, points > 0 ? std::optional<int>(points) : std::nullopt, exec);
    std::string target = out;
    if (target.empty() && cfg.contains("output") && cfg["output"].contains("csv"))
      target = cfg["output"]["csv"].get<std::string>();
    if (target.empty() || target == "-") {
      t.write_csv(std::cout);
    } else {
      std::ofstream f(target);
      if (!f) return fail(2, "cannot write " + target);
      t.write_csv(f);
    }
    return 0;
  });
}
