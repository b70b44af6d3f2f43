#pragma once

#include <sstream>
#include <string>

#include "asbim/model/params.hpp"
#include "asbim/text_io.hpp"

namespace asbim::model {

inline constexpr std::string_view kCheckpointMagic = "asbim-checkpoint 1";

/// Plain-text checkpoint. Doubles use shortest round-trip formatting, so
/// parse_checkpoint(format_checkpoint(p)) is bit-identical to p. `comment` lines are
/// written with a leading '#' and ignored on load.
inline std::string format_checkpoint(const ModelParameters& p, const std::string& comment = {}) {
  std::string out(kCheckpointMagic);
  out += '\n';
  for (const auto& line : io::lines_of(comment)) out += "# " + line + '\n';
  out += "variant " + std::string(to_string(p.variant)) + '\n';
  out += "q " + std::to_string(p.q) + '\n';
  out += "h " + std::to_string(p.h) + '\n';
  const auto row = [&](const char* key, const std::array<double, 5>& a) {
    out += key;
    for (double x : a) out += ' ' + io::format_double(x);
    out += '\n';
  };
  row("scaling.mean", p.scaling.mean);
  row("scaling.sd", p.scaling.sd);
  const auto lst = tensor_list(p);
  for (const auto& [info, values] : lst) {
    out += "tensor " + info.name + ' ' + std::to_string(values.size()) + '\n';
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out += ' ';
      out += io::format_double(values[i]);
    }
    out += '\n';
  }
  out += "end\n";
  return out;
}

inline ModelParameters parse_checkpoint(const std::string& text) {
  std::vector<std::string> lines;
  for (auto& l : io::lines_of(text)) {
    if (!l.empty() && l[0] == '#') continue;
    lines.push_back(std::move(l));
  }
  std::size_t pos = 0;
  const auto fail = [&](const std::string& msg) -> void {
    throw ConfigError("checkpoint line " + std::to_string(pos + 1) + ": " + msg);
  };
  const auto next = [&]() -> std::string {
    if (pos >= lines.size()) fail("unexpected end of file");
    return lines[pos++];
  };
  if (next() != kCheckpointMagic) fail("not an asbim checkpoint");

  const auto keyed = [&](const std::string& key) {
    std::istringstream ss(next());
    std::string k;
    ss >> k;
    if (k != key) fail("expected '" + key + "'");
    std::vector<std::string> rest;
    std::string tok;
    while (ss >> tok) rest.push_back(tok);
    return rest;
  };
  const auto number = [&](const std::string& s) {
    const auto v = io::parse_double(s);
    if (!v) fail("bad number '" + s + "'");
    return *v;
  };
  const auto integer = [&](const std::string& s) {
    const auto v = io::parse_int(s);
    if (!v) fail("bad integer '" + s + "'");
    return static_cast<int>(*v);
  };

  const auto variant = keyed("variant");
  const auto q = keyed("q");
  const auto h = keyed("h");
  if (variant.size() != 1 || q.size() != 1 || h.size() != 1) fail("malformed header");
  auto p = zeros(parse_variant(variant[0]), integer(q[0]), integer(h[0]));
  for (auto* target : {&p.scaling.mean, &p.scaling.sd}) {
    const auto vals = keyed(target == &p.scaling.mean ? "scaling.mean" : "scaling.sd");
    if (vals.size() != target->size()) fail("scaling needs 5 values");
    for (std::size_t i = 0; i < vals.size(); ++i) (*target)[i] = number(vals[i]);
  }
  auto lst = tensor_list(p);
  for (auto& [info, values] : lst) {
    const auto head = keyed("tensor");
    if (head.size() != 2 || head[0] != info.name) fail("expected tensor " + info.name);
    if (static_cast<std::size_t>(integer(head[1])) != values.size()) fail("size mismatch for " + info.name);
    std::istringstream ss(next());
    std::string tok;
    std::size_t i = 0;
    while (ss >> tok) {
      if (i >= values.size()) fail("too many values for " + info.name);
      values[i++] = number(tok);
    }
    if (i != values.size()) fail("too few values for " + info.name);
  }
  if (next() != "end") fail("expected 'end'");
  return p;
}

inline void save_checkpoint(const std::string& path, const ModelParameters& p, const std::string& comment = {}) {
  io::write_file(path, format_checkpoint(p, comment));
}

inline ModelParameters load_checkpoint(const std::string& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const Error&) {
    throw ConfigError("cannot read checkpoint '" + path + "'");
  }
  return parse_checkpoint(text);
}

}  // namespace asbim::model
