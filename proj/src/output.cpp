#include "gripest/output.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "gripest/errors.hpp"
#include "gripest/tire.hpp"

namespace gripest {

OutputRow make_output_row(const VehicleState& x, const InputSample& u, const TireParamSet& P,
                          const VehicleConfig& cfg) {
  OutputRow row;
  row.x = x;
  row.params = P;
  row.BCD_f = cornering_stiffness(P.front);
  row.BCD_r = cornering_stiffness(P.rear);
  if (!lateral_force_gate(x, cfg)) return row;
  try {
    const AxleLateralState s = axle_lateral_state(x, u, P, cfg);
    row.alpha_f = s.alpha_f;
    row.alpha_r = s.alpha_r;
    row.Fyf = s.Fyf;
    row.Fyr = s.Fyr;
    row.beta = std::atan(x.vy / x.vx);
    row.ay_derived = (s.Fyf * std::cos(u.delta) + s.Fyr) / cfg.m;
  } catch (const Error&) {
    // Loads or steering outside the model domain: leave the fields empty.
  }
  return row;
}

std::string format_number(std::optional<double> v) {
  if (!v) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", *v);
  return buf;
}

std::string format_estimate_row(const OutputRow& row) {
  char t[32];
  std::snprintf(t, sizeof t, "%.6f", row.x.t);
  std::string line = t;
  for (std::optional<double> v :
       {std::optional<double>(row.x.vx), std::optional<double>(row.x.vy),
        std::optional<double>(row.x.r), std::optional<double>(row.x.bx),
        std::optional<double>(row.x.by), std::optional<double>(row.x.br), row.alpha_f,
        row.alpha_r, row.Fyf, row.Fyr, std::optional<double>(row.BCD_f),
        std::optional<double>(row.BCD_r), row.beta}) {
    line += ',';
    line += format_number(v);
  }
  return line;
}

void write_estimate_csv(std::ostream& out, const std::vector<OutputRow>& rows) {
  out << kEstimateCsvHeader << '\n';
  for (const OutputRow& row : rows) out << format_estimate_row(row) << '\n';
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

CsvTable read_csv_table(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.columns = split(line);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.columns.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(table.columns.size()) + " fields, got " +
                       std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].empty()) {
        row[i] = std::nan("");
        continue;
      }
      char* end = nullptr;
      row[i] = std::strtod(cells[i].c_str(), &end);
      if (end == cells[i].c_str() || *end != '\0') {
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + cells[i] + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<EstimateRecord> read_estimate_csv(std::istream& in) {
  const CsvTable table = read_csv_table(in);
  auto col = [&](const char* name) {
    const int c = table.column(name);
    if (c < 0) throw SchemaError(std::string("estimate CSV lacks column '") + name + "'");
    return static_cast<std::size_t>(c);
  };
  const std::size_t ct = col("t"), cvx = col("vx"), cvy = col("vy"), cr = col("r"),
                    cbx = col("bx"), cby = col("by"), cbr = col("br"), caf = col("alpha_f"),
                    car = col("alpha_r"), cff = col("Fyf"), cfr = col("Fyr"),
                    ckf = col("BCD_f"), ckr = col("BCD_r"), cb = col("beta");
  auto opt = [](double v) { return std::isnan(v) ? std::nullopt : std::optional<double>(v); };
  std::vector<EstimateRecord> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    EstimateRecord e;
    e.t = row[ct];
    e.vx = row[cvx];
    e.vy = row[cvy];
    e.r = row[cr];
    e.bx = row[cbx];
    e.by = row[cby];
    e.br = row[cbr];
    e.alpha_f = opt(row[caf]);
    e.alpha_r = opt(row[car]);
    e.Fyf = opt(row[cff]);
    e.Fyr = opt(row[cfr]);
    e.BCD_f = row[ckf];
    e.BCD_r = row[ckr];
    e.beta = opt(row[cb]);
    out.push_back(e);
  }
  return out;
}

}  // namespace gripest
