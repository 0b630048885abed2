#include "refinery/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "refinery/dsl.hpp"
#include "refinery/noise.hpp"
#include "refinery/prob.hpp"
#include "refinery/refinement.hpp"

namespace refinery {

std::string render_report(const CheckReport& report, ReportFormat format,
                          bool color) {
  if (format == ReportFormat::json) {
    nlohmann::ordered_json j;
    j["check"] = report.check;
    j["verdict"] = report.pass ? "pass" : "fail";
    j["failed_condition"] =
        report.failed_condition ? nlohmann::ordered_json(*report.failed_condition)
                                : nlohmann::ordered_json(nullptr);
    j["degree"] = report.degree
                      ? nlohmann::ordered_json(rational_to_string(*report.degree))
                      : nlohmann::ordered_json(nullptr);
    auto witnesses = nlohmann::ordered_json::array();
    for (const auto& w : report.witnesses) {
      nlohmann::ordered_json obj;
      for (const auto& [slot, value] : w.fields) obj[slot] = value;
      witnesses.push_back(std::move(obj));
    }
    j["witnesses"] = std::move(witnesses);
    return j.dump() + "\n";
  }

  std::ostringstream out;
  std::string verdict = report.pass ? "PASS" : "FAIL";
  if (color)
    verdict = (report.pass ? "\x1b[32m" : "\x1b[31m") + verdict + "\x1b[0m";
  out << report.check << ": " << verdict;
  if (report.failed_condition) out << " (" << *report.failed_condition << ")";
  out << "\n";
  if (report.degree) out << "  degree: " << rational_to_string(*report.degree) << "\n";
  for (const auto& w : report.witnesses) {
    out << "  witness:";
    for (const auto& [slot, value] : w.fields) out << ' ' << slot << '=' << value;
    out << "\n";
  }
  return out.str();
}

namespace {

template <typename Map>
const typename Map::mapped_type& resolve(const Map& map, const std::string& name,
                                         const char* category) {
  auto it = map.find(name);
  if (it == map.end())
    throw Error(std::string("unknown ") + category + " " + name);
  return it->second;
}

// the found transformer rides along as witness rows of a passing report
void attach_transformer(CheckReport& report, const IOTransformer& t) {
  for (const auto& pair : t.pairs)
    report.witnesses.push_back(witness_of(t.slots, pair));
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"refinery: finite-model refinement checks over .rfn workspaces"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string format_name = "text";
  app.add_option("--spec", spec_path, "workspace file (.rfn)")
      ->required();
  app.add_option("--format", format_name, "report format: text or json")
      ->check(CLI::IsMember({"text", "json"}));

  std::string abstract_name, concrete_name, ot_name, retrieve_name, prob_name,
      target_name, model_name;
  std::uint64_t budget = 1'000'000;

  auto add_subcommand = [&app](const char* name, const char* description) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->fallthrough();  // --spec/--format may follow the verb
    return sub;
  };

  CLI::App* validate = add_subcommand("validate", "parse and validate the workspace");

  CLI::App* check_output =
      add_subcommand("check-output", "plain output refinement (fixed transformer)");
  check_output->add_option("--abstract", abstract_name)->required();
  check_output->add_option("--concrete", concrete_name)->required();
  check_output->add_option("--ot", ot_name)->required();

  CLI::App* search_ot =
      add_subcommand("search-ot", "search for a passing output transformer");
  search_ot->add_option("--abstract", abstract_name)->required();
  search_ot->add_option("--concrete", concrete_name)->required();
  search_ot->add_option("--budget", budget, "max candidates examined");

  CLI::App* check_abstraction =
      add_subcommand("check-abstraction", "output refinement established by search");
  check_abstraction->add_option("--abstract", abstract_name)->required();
  check_abstraction->add_option("--concrete", concrete_name)->required();
  check_abstraction->add_option("--budget", budget, "max candidates examined");

  CLI::App* check_data =
      add_subcommand("check-data", "downward-simulation data refinement");
  check_data->add_option("--abstract", abstract_name)->required();
  check_data->add_option("--concrete", concrete_name)->required();
  check_data->add_option("--retrieve", retrieve_name)->required();

  CLI::App* check_prob =
      add_subcommand("check-prob", "probabilistic refines nondeterministic");
  check_prob->add_option("--abstract", abstract_name)->required();
  check_prob->add_option("--prob", prob_name)->required();

  CLI::App* degree_cmd =
      add_subcommand("degree", "confidence-graded refinement degree");
  degree_cmd->add_option("--target", target_name)->required();
  degree_cmd->add_option("--prob", prob_name)->required();

  CLI::App* noise_check =
      add_subcommand("noise-check", "absorption axiom of a noise model");
  noise_check->add_option("--model", model_name)->required();

  CLI::App* check_noisy =
      add_subcommand("check-noisy", "refinement modulo addition of noise");
  check_noisy->add_option("--abstract", abstract_name)->required();
  check_noisy->add_option("--concrete", concrete_name)->required();
  check_noisy->add_option("--model", model_name)->required();

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  ReportFormat format =
      format_name == "json" ? ReportFormat::json : ReportFormat::text;
  const char* color_env = std::getenv("REFINERY_COLOR");
  bool color = format == ReportFormat::text && color_env &&
               std::string_view(color_env) == "1";

  std::ifstream file(spec_path, std::ios::binary);
  if (!file) {
    err << "cannot read " << spec_path << "\n";
    return 2;
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  ParseResult parsed = parse_spec(buffer.str());
  for (const auto& d : parsed.diagnostics)
    err << spec_path << ':' << format_diagnostic(d) << "\n";
  if (!parsed.ok()) return 2;
  const Workspace& ws = *parsed.workspace;

  try {
    CheckReport report;
    if (validate->parsed()) {
      report = pass_report("validate");
    } else if (check_output->parsed()) {
      report = check_output_refinement(
          resolve(ws.operations, abstract_name, "operation"),
          resolve(ws.operations, concrete_name, "operation"),
          resolve(ws.transformers, ot_name, "transformer"));
    } else if (search_ot->parsed()) {
      TransformerSearch search = search_output_transformer(
          resolve(ws.operations, abstract_name, "operation"),
          resolve(ws.operations, concrete_name, "operation"), budget);
      if (search.outcome == SearchOutcome::budget_exhausted) {
        err << "search budget exhausted after " << search.examined
            << " candidates; no transformer found, none ruled out\n";
        return 2;
      }
      if (search.found()) {
        report = pass_report("search-ot");
        attach_transformer(report, *search.transformer);
      } else {
        report = fail_report("search-ot", "no-transformer");
      }
    } else if (check_abstraction->parsed()) {
      AbstractionCheck check = check_output_abstraction(
          resolve(ws.operations, abstract_name, "operation"),
          resolve(ws.operations, concrete_name, "operation"), budget);
      if (check.outcome == SearchOutcome::budget_exhausted) {
        err << "search budget exhausted; no transformer found, none ruled out\n";
        return 2;
      }
      report = check.report;
      if (check.transformer) attach_transformer(report, *check.transformer);
    } else if (check_data->parsed()) {
      report = check_downward_simulation(
          resolve(ws.datatypes, abstract_name, "datatype"),
          resolve(ws.datatypes, concrete_name, "datatype"),
          resolve(ws.retrieves, retrieve_name, "retrieve"));
    } else if (check_prob->parsed()) {
      report = check_prob_refinement(
          resolve(ws.operations, abstract_name, "operation"),
          resolve(ws.prob_operations, prob_name, "prob operation"));
    } else if (degree_cmd->parsed()) {
      report = pass_report("degree");
      report.degree = refinement_degree(
          resolve(ws.operations, target_name, "operation"),
          resolve(ws.prob_operations, prob_name, "prob operation"));
    } else if (noise_check->parsed()) {
      report = check_absorption(resolve(ws.noise_models, model_name, "noise model"));
    } else if (check_noisy->parsed()) {
      report = check_noisy_refinement(
          resolve(ws.operations, abstract_name, "operation"),
          resolve(ws.operations, concrete_name, "operation"),
          resolve(ws.noise_models, model_name, "noise model"));
    }
    out << render_report(report, format, color);
    return report.pass ? 0 : 1;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 2;
  }
}

}  // namespace refinery
