#pragma once

// Runtime configuration: built-in defaults, overridden by a key=value config
// file (path from --config or the HSCVAL_CONFIG environment variable), then
// by command-line flags.

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "hsc/numeric.hpp"

namespace hsc {

struct Config {
    NumParams num;
    size_t sea_cap = size_t(1) << 20;
    bool expand_sea = false;
    std::string out_path;   // empty: stdout
    std::string csv_path;   // empty: stdout
    double trace_step = 1.0;

    void set(const std::string& key, const std::string& value) {
        auto real = [&] {
            size_t pos = 0;
            double v = std::stod(value, &pos);
            if (pos != value.size())
                throw std::runtime_error("config: bad numeric value '" + value +
                                         "' for key '" + key + "'");
            return v;
        };
        if (key == "step") num.h = real();
        else if (key == "eps-time") num.eps_t = real();
        else if (key == "eps-value") num.eps_v = real();
        else if (key == "horizon") num.horizon = real();
        else if (key == "goal-margin") num.goal_margin = real();
        else if (key == "natural-cap") num.natural_cap = size_t(real());
        else if (key == "sea-cap") sea_cap = size_t(real());
        else if (key == "expand-sea") expand_sea = value == "1" || value == "true";
        else if (key == "trace-step") trace_step = real();
        else if (key == "out") out_path = value;
        else if (key == "csv") csv_path = value;
        else throw std::runtime_error("config: unknown key '" + key + "'");
        if (num.h <= 0 || num.eps_t <= 0 || num.eps_v <= 0 || num.horizon <= 0 ||
            sea_cap < 1 || num.natural_cap < 1)
            throw std::runtime_error("config: '" + key + "' must be positive");
    }

    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("config: cannot read '" + path + "'");
        std::string line;
        int n = 0;
        while (std::getline(in, line)) {
            ++n;
            std::string body = line.substr(0, line.find('#'));
            size_t b = body.find_first_not_of(" \t\r");
            if (b == std::string::npos) continue;
            size_t e = body.find_last_not_of(" \t\r");
            body = body.substr(b, e - b + 1);
            size_t eq = body.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config: line " + std::to_string(n) +
                                         " is not key=value");
            std::string k = body.substr(0, eq), v = body.substr(eq + 1);
            while (!k.empty() && (k.back() == ' ' || k.back() == '\t')) k.pop_back();
            size_t vb = v.find_first_not_of(" \t");
            v = vb == std::string::npos ? "" : v.substr(vb);
            set(k, v);
        }
    }

    // defaults <- env-named config file; flag overrides happen in the CLI
    static Config from_environment() {
        Config c;
        if (const char* p = std::getenv("HSCVAL_CONFIG")) c.load_file(p);
        return c;
    }
};

} // namespace hsc
