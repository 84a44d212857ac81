// Command-line front end for the toolkit: parsing and validation, DOT and
// JSON export, class/model transformation, and event simulation.
//
// Exit codes: 0 success, 1 validation or transform failure, 2 usage, syntax
// or schema errors.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "tmkit/tm.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_model_error = 1;
constexpr int exit_usage_error = 2;

bool color_enabled(FILE* stream) {
  if (std::getenv("TM_NO_COLOR")) return false;
  return isatty(fileno(stream)) != 0;
}

void print_diagnostic(const tmkit::Diagnostic& d) {
  bool color = color_enabled(stderr);
  const char* tint = d.severity == tmkit::Severity::Error ? "\033[31m" : "\033[33m";
  if (color) std::cerr << tint;
  std::cerr << tmkit::render_diagnostic(d);
  if (color) std::cerr << "\033[0m";
  std::cerr << '\n';
}

int error_exit_code(const tmkit::Error& e) {
  if (e.code() == "PARSE" || e.code() == "SCHEMA" || e.code() == "USAGE")
    return exit_usage_error;
  return exit_model_error;
}

int report(const tmkit::Error& e) {
  print_diagnostic(e.to_diagnostic());
  return error_exit_code(e);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tmkit::Error("USAGE", "cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Partial outputs never appear: write a sibling temp file, then rename.
void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw tmkit::Error("USAGE", "cannot write file: " + tmp);
    out << content;
    if (!out.flush()) throw tmkit::Error("USAGE", "write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw tmkit::Error("USAGE", "cannot rename " + tmp + " to " + path);
}

void emit(const std::optional<std::string>& out_path, const std::string& content) {
  if (out_path)
    write_file_atomic(*out_path, content);
  else
    std::cout << content;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Loads a model from .tm or .json input; any finding is fatal here because
// every consumer of this helper needs a valid model.
tmkit::Model load_model(const std::string& path) {
  std::string text = read_file(path);
  if (has_suffix(path, ".json")) return tmkit::import_json(text);
  tmkit::Document doc = tmkit::parse(text);
  if (!doc.diagnostics.empty()) {
    for (const tmkit::Diagnostic& d : doc.diagnostics) print_diagnostic(d);
    throw tmkit::Error("INVALID_INPUT", "model in " + path + " does not validate");
  }
  return std::move(doc.model);
}

tmkit::Bindings parse_bindings(const std::vector<std::string>& raw) {
  tmkit::Bindings bindings;
  for (const std::string& b : raw) {
    std::size_t eq = b.find('=');
    if (eq == std::string::npos || eq == 0)
      throw tmkit::Error("USAGE", "--bind expects EVENT=VALUE, got: " + b);
    std::string value = b.substr(eq + 1);
    bindings[b.substr(0, eq)] =
        value == "null" ? tmkit::StoreValue{} : tmkit::StoreValue{value};
  }
  return bindings;
}

// ---- subcommands ----

int cmd_parse(const std::string& file) {
  tmkit::Document doc = tmkit::parse(read_file(file));
  for (const tmkit::Diagnostic& d : doc.diagnostics) print_diagnostic(d);
  if (!doc.diagnostics.empty()) return exit_model_error;
  std::cout << "parsed " << file << ": " << doc.model.machines.size() << " machines, "
            << doc.model.flows.size() << " flows, " << doc.model.triggers.size()
            << " triggers, " << doc.model.events.size() << " events, "
            << doc.model.programs.size() << " programs, " << doc.classes.size()
            << " classes\n";
  return exit_ok;
}

int cmd_validate(const std::string& file) {
  std::string text = read_file(file);
  std::vector<tmkit::Diagnostic> diags;
  if (has_suffix(file, ".json")) {
    tmkit::Model model = tmkit::import_json(text);  // throws with its own location
    diags = tmkit::validate(model);
  } else {
    diags = tmkit::parse(text).diagnostics;
  }
  for (const tmkit::Diagnostic& d : diags) print_diagnostic(d);
  return diags.empty() ? exit_ok : exit_model_error;
}

int cmd_render(const std::string& file, const std::string& level,
               const std::vector<std::string>& events, bool no_triggers,
               const std::optional<std::string>& out) {
  tmkit::Model model = load_model(file);
  tmkit::RenderOptions opts;
  opts.level = level == "elided" ? tmkit::RenderLevel::Elided : tmkit::RenderLevel::Full;
  opts.show_triggers = !no_triggers;
  opts.show_events = events;
  emit(out, tmkit::render_dot(model, opts));
  return exit_ok;
}

int cmd_simulate(const std::string& file, const std::string& program_name,
                 const std::vector<std::string>& raw_bindings,
                 const std::optional<std::string>& trace_out,
                 const std::optional<std::string>& json_out) {
  tmkit::Model model = load_model(file);
  const tmkit::Program* program = model.find_program(program_name);
  if (!program)
    throw tmkit::Error("USAGE", "no program named '" + program_name + "' in " + file);
  tmkit::Bindings bindings = parse_bindings(raw_bindings);

  tmkit::SimResult result;
  try {
    result = tmkit::simulate(model, *program, bindings);
  } catch (const tmkit::SimulationError& e) {
    if (trace_out)
      write_file_atomic(*trace_out, tmkit::trace_to_text(e.partial_trace()));
    else
      std::cout << tmkit::trace_to_text(e.partial_trace());
    throw;
  }

  std::string text = tmkit::trace_to_text(result.trace);
  if (trace_out)
    write_file_atomic(*trace_out, text);
  else
    std::cout << text;
  if (json_out)
    write_file_atomic(*json_out,
                      tmkit::export_trace_json(model, result.trace, result.final_state));
  return exit_ok;
}

int cmd_from_class(const std::string& file, const std::string& class_name, bool hierarchy,
                   const std::optional<std::string>& out) {
  std::vector<tmkit::ClassSpec> specs;
  std::string text = read_file(file);
  if (has_suffix(file, ".json")) {
    specs.push_back(tmkit::class_from_json(text));
  } else {
    specs = tmkit::parse(text).classes;
  }
  if (specs.empty()) throw tmkit::Error("USAGE", "no class declarations in " + file);

  tmkit::Model model;
  if (hierarchy) {
    model = tmkit::from_hierarchy(specs);
  } else {
    const tmkit::ClassSpec* chosen = nullptr;
    if (!class_name.empty()) {
      for (const tmkit::ClassSpec& s : specs)
        if (s.name == class_name) chosen = &s;
      if (!chosen) throw tmkit::Error("USAGE", "no class named '" + class_name + "' in " + file);
    } else if (specs.size() == 1) {
      chosen = &specs.front();
    } else {
      throw tmkit::Error("USAGE", "several classes in " + file + "; pick one with --class");
    }
    model = tmkit::from_class(*chosen);
  }
  emit(out, tmkit::format(model));
  return exit_ok;
}

int cmd_to_class(const std::string& file, bool hierarchy, const std::optional<std::string>& out) {
  tmkit::Model model = load_model(file);
  if (hierarchy) {
    std::string text;
    for (const tmkit::ClassSpec& spec : tmkit::to_hierarchy(model))
      text += tmkit::class_to_json(spec);
    emit(out, text);
  } else {
    emit(out, tmkit::class_to_json(tmkit::to_class(model)));
  }
  return exit_ok;
}

int cmd_events(const std::string& file) {
  tmkit::Model model = load_model(file);
  for (const tmkit::Event& e : model.events) {
    std::cout << e.id << '\t' << tmkit::event_kind_name(e.kind);
    if (e.kind == tmkit::EventKind::Set || e.kind == tmkit::EventKind::Get)
      std::cout << '(' << e.attr << ')';
    std::cout << '\t' << e.label << '\n';
  }
  for (const auto& [a, b] : model.chronology) std::cout << a << " -> " << b << '\n';
  return exit_ok;
}

int cmd_json(const std::string& file, const std::optional<std::string>& out) {
  emit(out, tmkit::export_json(load_model(file)));
  return exit_ok;
}

int cmd_format(const std::string& file, const std::optional<std::string>& out) {
  emit(out, tmkit::format(load_model(file)));
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thinging machine modeling toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tm 1.0.0");

  std::string file, level = "full", program, class_name;
  std::vector<std::string> events, bindings;
  std::optional<std::string> out, trace_out, json_out;
  bool no_triggers = false, hierarchy = false;

  auto* parse_cmd = app.add_subcommand("parse", "parse a .tm file and validate it");
  parse_cmd->add_option("file", file, "input file")->required();

  auto* validate_cmd = app.add_subcommand("validate", "run the validators and print diagnostics");
  validate_cmd->add_option("file", file, "input file")->required();

  auto* render_cmd = app.add_subcommand("render", "emit a DOT diagram");
  render_cmd->add_option("file", file, "input model (.tm or .json)")->required();
  render_cmd->add_option("--level", level, "full or elided view")
      ->check(CLI::IsMember({"full", "elided"}));
  render_cmd->add_option("--events", events, "event ids whose regions get highlighted")
      ->delimiter(',');
  render_cmd->add_flag("--no-triggers", no_triggers, "hide trigger edges");
  render_cmd->add_option("-o,--out", out, "output file (default: stdout)");

  auto* simulate_cmd = app.add_subcommand("simulate", "run a program and print its trace");
  simulate_cmd->add_option("file", file, "input model (.tm or .json)")->required();
  simulate_cmd->add_option("--program", program, "program name")->required();
  simulate_cmd->add_option("--bind", bindings, "input value per set event (EVENT=VALUE)");
  simulate_cmd->add_option("--trace", trace_out, "write the trace to a file");
  simulate_cmd->add_option("--json", json_out, "write a JSON report with the embedded trace");

  auto* from_class_cmd = app.add_subcommand("from-class", "generate the model for a class");
  from_class_cmd->add_option("file", file, "class input (.tm or .json)")->required();
  from_class_cmd->add_option("--class", class_name, "class to generate when several are declared");
  from_class_cmd->add_flag("--hierarchy", hierarchy,
                           "treat all classes as an inheritance forest");
  from_class_cmd->add_option("-o,--out", out, "output file (default: stdout)");

  auto* to_class_cmd = app.add_subcommand("to-class", "extract the class a model was generated from");
  to_class_cmd->add_option("file", file, "input model (.tm or .json)")->required();
  to_class_cmd->add_flag("--hierarchy", hierarchy, "extract an inheritance forest");
  to_class_cmd->add_option("-o,--out", out, "output file (default: stdout)");

  auto* events_cmd = app.add_subcommand("events", "list events and chronology edges");
  events_cmd->add_option("file", file, "input model (.tm or .json)")->required();

  auto* json_cmd = app.add_subcommand("json", "export the model as canonical JSON");
  json_cmd->add_option("file", file, "input model (.tm or .json)")->required();
  json_cmd->add_option("-o,--out", out, "output file (default: stdout)");

  auto* format_cmd = app.add_subcommand("format", "print the canonical text of a model");
  format_cmd->add_option("file", file, "input model (.tm or .json)")->required();
  format_cmd->add_option("-o,--out", out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[USAGE]: " << e.what() << "\n\n" << app.help();
    return exit_usage_error;
  }

  try {
    if (parse_cmd->parsed()) return cmd_parse(file);
    if (validate_cmd->parsed()) return cmd_validate(file);
    if (render_cmd->parsed()) return cmd_render(file, level, events, no_triggers, out);
    if (simulate_cmd->parsed()) return cmd_simulate(file, program, bindings, trace_out, json_out);
    if (from_class_cmd->parsed()) return cmd_from_class(file, class_name, hierarchy, out);
    if (to_class_cmd->parsed()) return cmd_to_class(file, hierarchy, out);
    if (events_cmd->parsed()) return cmd_events(file);
    if (json_cmd->parsed()) return cmd_json(file, out);
    if (format_cmd->parsed()) return cmd_format(file, out);
  } catch (const tmkit::Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    std::cerr << "error[INTERNAL]: " << e.what() << '\n';
    return exit_model_error;
  }
  return exit_usage_error;
}
