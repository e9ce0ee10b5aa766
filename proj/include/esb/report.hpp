#pragma once

#include "esb/driver.hpp"

#include <string>

namespace esb {

inline constexpr const char* kProgressCsvHeader =
    "cycle,k,num_escs,num_cuts,bound,best_bound,oracle_time_s,other_time_s";

std::string report_to_json(const EsbReport& r);
/// Inverse of report_to_json; throws std::invalid_argument on malformed input.
EsbReport report_from_json(const std::string& text);

std::string report_to_csv(const EsbReport& r);
std::string csv_row(const CycleRecord& c);

}  // namespace esb
