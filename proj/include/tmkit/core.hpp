#pragma once

// Fundamental value types shared by every layer of the toolkit: stage kinds,
// element paths, source spans, diagnostics and the error type.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace tmkit {

// ---------------------------------------------------------------------------
// Stage kinds

// The five stages a machine may contain. No other kind is representable.
enum class StageKind : std::uint8_t { Create, Process, Receive, Release, Transfer };

inline constexpr std::array<StageKind, 5> all_stage_kinds = {
    StageKind::Create, StageKind::Process, StageKind::Receive,
    StageKind::Release, StageKind::Transfer};

// Lowercase keyword form, as used in paths and the DSL.
inline std::string_view stage_keyword(StageKind k) {
  switch (k) {
    case StageKind::Create: return "create";
    case StageKind::Process: return "process";
    case StageKind::Receive: return "receive";
    case StageKind::Release: return "release";
    case StageKind::Transfer: return "transfer";
  }
  return "?";
}

// Capitalized form used for diagram labels.
inline std::string_view stage_label(StageKind k) {
  switch (k) {
    case StageKind::Create: return "Create";
    case StageKind::Process: return "Process";
    case StageKind::Receive: return "Receive";
    case StageKind::Release: return "Release";
    case StageKind::Transfer: return "Transfer";
  }
  return "?";
}

inline std::optional<StageKind> stage_from_keyword(std::string_view s) {
  for (StageKind k : all_stage_kinds)
    if (s == stage_keyword(k)) return k;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Paths

// Dotted path naming a machine ("Author.name.store") or a stage of one
// ("Author.name.receive"). The terminal segment may be a stage keyword;
// machine names themselves can never collide with stage keywords because the
// five keywords are reserved.
struct Path {
  std::vector<std::string> segments;
  std::optional<StageKind> stage;

  bool empty() const { return segments.empty(); }

  // Path of the machine that owns the element (drops the stage segment).
  Path machine() const { return Path{segments, std::nullopt}; }

  Path child(std::string name) const {
    Path p{segments, std::nullopt};
    p.segments.push_back(std::move(name));
    return p;
  }

  Path with_stage(StageKind k) const { return Path{segments, k}; }

  std::string text() const {
    std::string out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (i) out += '.';
      out += segments[i];
    }
    if (stage) {
      if (!segments.empty()) out += '.';
      out += stage_keyword(*stage);
    }
    return out;
  }

  bool operator==(const Path&) const = default;
  auto operator<=>(const Path&) const = default;
};

// Builds a path from dotted text. A terminal segment equal to a stage keyword
// becomes the stage; a non-terminal stage keyword is an error (empty result).
inline std::optional<Path> parse_path(std::string_view text) {
  if (text.empty()) return std::nullopt;
  Path p;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = text.find('.', start);
    std::string_view seg = text.substr(start, dot == std::string_view::npos
                                                  ? std::string_view::npos
                                                  : dot - start);
    if (seg.empty()) return std::nullopt;
    bool last = dot == std::string_view::npos;
    if (auto k = stage_from_keyword(seg)) {
      if (!last) return std::nullopt;  // stage keywords are terminal only
      p.stage = k;
      return p;
    }
    p.segments.emplace_back(seg);
    if (last) return p;
    start = dot + 1;
  }
}

// ---------------------------------------------------------------------------
// Source locations and diagnostics

struct SourceSpan {
  int line = 1;    // 1-based
  int column = 1;  // 1-based
  int length = 0;

  bool operator==(const SourceSpan&) const = default;
};

enum class Severity { Error, Warning };

// One validator finding. `code` is the stable machine-readable tag; location
// is a path into the model and/or a source span when one is known.
struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  std::optional<Path> location;
  std::optional<SourceSpan> span;

  std::string location_text() const {
    if (location) return location->text();
    if (span) return std::to_string(span->line) + ":" + std::to_string(span->column);
    return "";
  }

  bool operator==(const Diagnostic&) const = default;
};

// Deterministic ordering: location, then code, then message.
inline bool diagnostic_order(const Diagnostic& a, const Diagnostic& b) {
  auto ka = std::tuple(a.location_text(), a.code, a.message);
  auto kb = std::tuple(b.location_text(), b.code, b.message);
  return ka < kb;
}

inline std::string render_diagnostic(const Diagnostic& d) {
  std::string out = d.severity == Severity::Error ? "error" : "warning";
  out += "[" + d.code + "]";
  std::string loc = d.location_text();
  if (!loc.empty()) out += " " + loc;
  out += ": " + d.message;
  return out;
}

// ---------------------------------------------------------------------------
// Errors

// Thrown by operations whose contract is violated. `code` matches the
// diagnostic code vocabulary so the CLI can print a uniform line.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  Error(std::string code, const std::string& message, Path location)
      : std::runtime_error(message), code_(std::move(code)),
        location_(std::move(location)) {}
  Error(std::string code, const std::string& message, SourceSpan span)
      : std::runtime_error(message), code_(std::move(code)), span_(span) {}

  const std::string& code() const { return code_; }
  const std::optional<Path>& location() const { return location_; }
  const std::optional<SourceSpan>& span() const { return span_; }

  Diagnostic to_diagnostic() const {
    return Diagnostic{Severity::Error, code_, what(), location_, span_};
  }

 private:
  std::string code_;
  std::optional<Path> location_;
  std::optional<SourceSpan> span_;
};

}  // namespace tmkit
