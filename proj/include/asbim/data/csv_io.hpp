#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>

#include "asbim/data/types.hpp"
#include "asbim/text_io.hpp"

namespace asbim::data {

inline constexpr std::string_view kSequenceHeader = "dyad_id,t,maut,cdef";
inline constexpr std::string_view kDyadHeader = "dyad_id,gender,ext_t1,ext_t2,inhibitory_control";

struct DatasetPaths {
  std::string sequences;
  std::string dyads;
};

namespace csv_detail {

struct Table {
  std::string name;
  std::vector<std::string> header;
  // (1-based line number, cells)
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;

  std::optional<std::size_t> find_column(const std::string& col) const {
    const auto it = std::find(header.begin(), header.end(), col);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  }

  std::size_t column(const std::string& col) const {
    const auto c = find_column(col);
    if (!c) throw IngestionError(name + ": missing column '" + col + "'");
    return *c;
  }
};

inline Table parse_table(const std::string& name, const std::string& text) {
  auto lines = io::lines_of(text);
  if (!lines.empty() && lines[0].rfind("\xEF\xBB\xBF", 0) == 0) lines[0].erase(0, 3);
  if (lines.empty() || io::trim(lines[0]).empty()) throw IngestionError(name + ": header row required");
  Table t{name, io::split_csv_line(lines[0]), {}};
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (io::trim(lines[i]).empty()) continue;
    auto cells = io::split_csv_line(lines[i]);
    if (cells.size() != t.header.size()) {
      throw IngestionError(name + " line " + std::to_string(i + 1) + ": expected " + std::to_string(t.header.size()) +
                           " cells, found " + std::to_string(cells.size()));
    }
    t.rows.emplace_back(i + 1, std::move(cells));
  }
  return t;
}

inline std::string where(const Table& t, std::size_t line) { return t.name + " line " + std::to_string(line); }

inline std::optional<double> optional_number(const Table& t, std::size_t line, const std::string& cell,
                                             const char* col) {
  if (cell.empty()) return std::nullopt;
  auto v = io::parse_double(cell);
  if (!v || !std::isfinite(*v)) throw IngestionError(where(t, line) + ": column " + col + " is not a number: '" + cell + "'");
  return v;
}

inline void check_range(const Table& t, std::size_t line, const std::optional<double>& v, double lo, double hi,
                        const char* col) {
  if (v && !in_range(*v, lo, hi)) {
    throw IngestionError(where(t, line) + ": " + col + " = " + io::format_double(*v) + " outside [" +
                         io::format_double(lo) + ", " + io::format_double(hi) + "]");
  }
}

inline Gender parse_gender(const Table& t, std::size_t line, const std::string& cell) {
  if (cell == "0" || cell == "boy") return Gender::Boy;
  if (cell == "1" || cell == "girl") return Gender::Girl;
  throw IngestionError(where(t, line) + ": gender must be 0/1 or boy/girl, got '" + cell + "'");
}

}  // namespace csv_detail

/// Parses the two CSV documents. Dyads keep the order of the per-dyad file.
inline RawDataset parse_dataset(const std::string& sequences_csv, const std::string& dyads_csv,
                                const std::string& seq_name = "sequences", const std::string& dyad_name = "dyads") {
  using namespace csv_detail;
  const Table dyads = parse_table(dyad_name, dyads_csv);
  const Table seqs = parse_table(seq_name, sequences_csv);

  RawDataset out;
  std::unordered_map<std::string, std::size_t> index;
  {
    const auto c_id = dyads.column("dyad_id"), c_g = dyads.column("gender"), c_t1 = dyads.column("ext_t1"),
               c_t2 = dyads.column("ext_t2");
    // Optional column: without it every dyad lacks inhibitory control.
    const auto c_ic = dyads.find_column("inhibitory_control");
    for (const auto& [line, cells] : dyads.rows) {
      RawDyadObservation d;
      d.dyad_id = cells[c_id];
      if (d.dyad_id.empty()) throw IngestionError(where(dyads, line) + ": empty dyad_id");
      if (index.count(d.dyad_id)) throw IngestionError(where(dyads, line) + ": duplicate dyad_id '" + d.dyad_id + "'");
      d.gender = parse_gender(dyads, line, cells[c_g]);
      const auto t1 = optional_number(dyads, line, cells[c_t1], "ext_t1");
      if (!t1) throw IngestionError(where(dyads, line) + ": ext_t1 is required");
      check_range(dyads, line, t1, kOutcomeMin, kOutcomeMax, "ext_t1");
      d.externalizing_t1 = *t1;
      d.externalizing_t2 = optional_number(dyads, line, cells[c_t2], "ext_t2");
      check_range(dyads, line, d.externalizing_t2, kOutcomeMin, kOutcomeMax, "ext_t2");
      if (c_ic) d.inhibitory_control = optional_number(dyads, line, cells[*c_ic], "inhibitory_control");
      check_range(dyads, line, d.inhibitory_control, kInhibitoryMin, kInhibitoryMax, "inhibitory_control");
      index.emplace(d.dyad_id, out.size());
      out.push_back(std::move(d));
    }
  }

  // Per dyad: t -> (maut, cdef, line)
  struct Cell {
    std::optional<double> maut, cdef;
    std::size_t line;
  };
  std::vector<std::map<long long, Cell>> by_t(out.size());
  {
    const auto c_id = seqs.column("dyad_id"), c_t = seqs.column("t"), c_m = seqs.column("maut"),
               c_c = seqs.column("cdef");
    for (const auto& [line, cells] : seqs.rows) {
      const auto it = index.find(cells[c_id]);
      if (it == index.end()) {
        throw IngestionError(where(seqs, line) + ": dyad_id '" + cells[c_id] + "' has no row in " + dyads.name);
      }
      const auto t = io::parse_int(cells[c_t]);
      if (!t || *t < 1) throw IngestionError(where(seqs, line) + ": t must be a positive integer");
      Cell cell{optional_number(seqs, line, cells[c_m], "maut"), optional_number(seqs, line, cells[c_c], "cdef"), line};
      check_range(seqs, line, cell.maut, kRatingMin, kRatingMax, "maut");
      check_range(seqs, line, cell.cdef, kRatingMin, kRatingMax, "cdef");
      if (!by_t[it->second].emplace(*t, cell).second) {
        throw IngestionError(where(seqs, line) + ": duplicate interval t=" + std::to_string(*t));
      }
    }
  }

  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& d = out[i];
    const auto& rows = by_t[i];
    if (rows.empty()) throw IngestionError(dyads.name + ": dyad '" + d.dyad_id + "' has no intervals");
    long long expected = 1;
    for (const auto& [t, cell] : rows) {
      if (t != expected) {
        throw IngestionError(where(seqs, cell.line) + ": dyad '" + d.dyad_id + "' intervals not contiguous (expected t=" +
                             std::to_string(expected) + ")");
      }
      d.maternal_autonomy_support.push_back(cell.maut);
      d.child_defeat_raw.push_back(cell.cdef);
      ++expected;
    }
    validate(d);
  }
  return out;
}

inline RawDataset load_dataset(const DatasetPaths& paths) {
  return parse_dataset(io::read_file(paths.sequences), io::read_file(paths.dyads), paths.sequences, paths.dyads);
}

inline std::string format_sequences_csv(const RawDataset& dataset) {
  std::string out(kSequenceHeader);
  out += '\n';
  for (const auto& d : dataset) {
    for (std::size_t t = 0; t < d.length(); ++t) {
      out += d.dyad_id + ',' + std::to_string(t + 1) + ',' + io::format_optional(d.maternal_autonomy_support[t]) +
             ',' + io::format_optional(d.child_defeat_raw[t]) + '\n';
    }
  }
  return out;
}

inline std::string format_dyads_csv(const RawDataset& dataset) {
  std::string out(kDyadHeader);
  out += '\n';
  for (const auto& d : dataset) {
    out += d.dyad_id + ',' + std::to_string(static_cast<int>(d.gender)) + ',' + io::format_double(d.externalizing_t1) +
           ',' + io::format_optional(d.externalizing_t2) + ',' + io::format_optional(d.inhibitory_control) + '\n';
  }
  return out;
}

inline void write_dataset(const RawDataset& dataset, const DatasetPaths& paths) {
  io::write_file(paths.sequences, format_sequences_csv(dataset));
  io::write_file(paths.dyads, format_dyads_csv(dataset));
}

}  // namespace asbim::data
