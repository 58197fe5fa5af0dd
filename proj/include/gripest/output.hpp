#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gripest/config.hpp"
#include "gripest/types.hpp"

namespace gripest {

/// Estimator output for one 10 ms state. Slip, force and side-slip fields
/// are empty below the lateral-force gate speed.
struct OutputRow {
  VehicleState x;
  std::optional<double> alpha_f;
  std::optional<double> alpha_r;
  std::optional<double> Fyf;
  std::optional<double> Fyr;
  std::optional<double> beta;
  std::optional<double> ay_derived;  // (Fyf cos delta + Fyr) / m
  double BCD_f = 0.0;
  double BCD_r = 0.0;
  TireParamSet params;
};

/// Output quantities of a solved state.
OutputRow make_output_row(const VehicleState& x, const InputSample& u, const TireParamSet& P,
                          const VehicleConfig& cfg);

inline constexpr const char* kEstimateCsvHeader =
    "t,vx,vy,r,bx,by,br,alpha_f,alpha_r,Fyf,Fyr,BCD_f,BCD_r,beta";

void write_estimate_csv(std::ostream& out, const std::vector<OutputRow>& rows);
std::string format_estimate_row(const OutputRow& row);

/// Reads an estimate CSV back. Empty fields become nullopt.
struct EstimateRecord {
  double t = 0.0;
  double vx = 0.0, vy = 0.0, r = 0.0, bx = 0.0, by = 0.0, br = 0.0;
  std::optional<double> alpha_f, alpha_r, Fyf, Fyr;
  double BCD_f = 0.0, BCD_r = 0.0;
  std::optional<double> beta;
};
std::vector<EstimateRecord> read_estimate_csv(std::istream& in);

/// Generic numeric CSV with a header row; empty cells become NaN.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 if absent
};
CsvTable read_csv_table(std::istream& in);

/// "%.9g", or an empty string for nullopt.
std::string format_number(std::optional<double> v);

}  // namespace gripest
