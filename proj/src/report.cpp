#include "esb/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>

namespace esb {

using nlohmann::json;

namespace {

// NaN and infinities are not representable in JSON; they travel as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_number(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string report_to_json(const EsbReport& r) {
    json j;
    j["graph_name"] = r.graph_name;
    j["n"] = r.n;
    j["m"] = r.m;
    j["problem"] = std::string(to_string(r.problem));
    j["cut_mode"] = r.cut_mode;
    j["max_order"] = r.max_order;
    j["seed"] = r.seed;
    j["basic_value"] = number(r.basic_value);
    j["heuristic_value"] = number(r.heuristic_value);
    j["esb"] = number(r.esb);
    j["failed"] = r.failed;
    j["failure"] = r.failure;
    j["total_time_s"] = r.total_time_s;
    j["cycles"] = json::array();
    for (const auto& c : r.cycles) {
        j["cycles"].push_back({{"cycle", c.cycle},
                               {"k", c.k},
                               {"num_escs", c.num_escs},
                               {"num_cuts", c.num_cuts},
                               {"bound", number(c.bound)},
                               {"best_bound", number(c.best_bound)},
                               {"oracle_time_s", c.oracle_time_s},
                               {"other_time_s", c.other_time_s}});
    }
    return j.dump(2) + "\n";
}

EsbReport report_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        EsbReport r;
        r.graph_name = j.at("graph_name").get<std::string>();
        r.n = j.at("n").get<int>();
        r.m = j.at("m").get<int>();
        r.problem = parse_problem(j.at("problem").get<std::string>());
        r.cut_mode = j.at("cut_mode").get<std::string>();
        r.max_order = j.at("max_order").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.basic_value = read_number(j.at("basic_value"));
        r.heuristic_value = read_number(j.at("heuristic_value"));
        r.esb = read_number(j.at("esb"));
        r.failed = j.at("failed").get<bool>();
        r.failure = j.at("failure").get<std::string>();
        r.total_time_s = j.at("total_time_s").get<double>();
        for (const auto& c : j.at("cycles")) {
            CycleRecord rec;
            rec.cycle = c.at("cycle").get<int>();
            rec.k = c.at("k").get<int>();
            rec.num_escs = c.at("num_escs").get<int>();
            rec.num_cuts = c.at("num_cuts").get<int>();
            rec.bound = read_number(c.at("bound"));
            rec.best_bound = read_number(c.at("best_bound"));
            rec.oracle_time_s = c.at("oracle_time_s").get<double>();
            rec.other_time_s = c.at("other_time_s").get<double>();
            r.cycles.push_back(rec);
        }
        return r;
    } catch (const json::exception& ex) {
        throw std::invalid_argument(std::string("report_from_json: ") + ex.what());
    }
}

std::string csv_row(const CycleRecord& c) {
    return std::to_string(c.cycle) + "," + std::to_string(c.k) + "," + std::to_string(c.num_escs) + "," +
           std::to_string(c.num_cuts) + "," + fmt(c.bound) + "," + fmt(c.best_bound) + "," + fmt(c.oracle_time_s) +
           "," + fmt(c.other_time_s);
}

std::string report_to_csv(const EsbReport& r) {
    std::string out = std::string(kProgressCsvHeader) + "\n";
    for (const auto& c : r.cycles) out += csv_row(c) + "\n";
    return out;
}

}  // namespace esb
