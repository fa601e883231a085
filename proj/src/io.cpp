#include "mfabc/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mfabc/errors.hpp"

namespace mfabc {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
      cell.pop_back();
    }
    out.push_back(cell);
  }
  return out;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  return out;
}

}  // namespace

std::vector<double> CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) {
      std::vector<double> values;
      values.reserve(rows.size());
      for (const auto& r : rows) {
        values.push_back(r.at(c));
      }
      return values;
    }
  }
  throw Error("CSV has no column '" + name + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open " + path.string());
  }
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(path.string() + ": empty file");
  }
  table.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") {
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                  std::to_string(table.header.size()) + " fields");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw Error(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_double(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return {buf, res.ptr};
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  auto out = open_for_write(path);
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    out << (c ? "," : "") << table.header[c];
  }
  out << '\n';
  for (const auto& r : table.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      out << (c ? "," : "") << format_double(r[c]);
    }
    out << '\n';
  }
}

void write_ensemble_csv(const std::filesystem::path& path, const WeightedEnsemble& ensemble,
                        const std::vector<std::string>& parameter_names) {
  auto out = open_for_write(path);
  for (const auto& name : parameter_names) {
    out << name << ',';
  }
  out << "weight\n";
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    for (const double v : ensemble.particles[i].theta) {
      out << format_double(v) << ',';
    }
    out << format_double(ensemble.weights[i]) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const ThresholdTrace& trace) {
  auto out = open_for_write(path);
  out << "iteration,epsilon,eps_aux,eps_lower,clamp_bound,ess,pa,resampled,hf_calls,lf_calls,prefilter_rejects,"
         "mh_accept_rate\n";
  for (const auto& r : trace.rows) {
    out << r.iteration << ',' << format_double(r.epsilon) << ',' << format_double(r.eps_aux) << ','
        << format_double(r.eps_lower) << ',' << (r.clamp_bound ? 1 : 0) << ',' << format_double(r.ess) << ','
        << format_double(r.pa) << ',' << (r.resampled ? 1 : 0) << ',' << r.hf_calls << ',' << r.lf_calls << ','
        << r.prefilter_rejects << ',' << format_double(r.mh_accept_rate) << '\n';
  }
}

void write_timing_csv(const std::filesystem::path& path, const ThresholdTrace& trace) {
  auto out = open_for_write(path);
  out << "iteration,wall_time\n";
  for (const auto& r : trace.rows) {
    out << r.iteration << ',' << format_double(r.wall_time) << '\n';
  }
}

}  // namespace mfabc
