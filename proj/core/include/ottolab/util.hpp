#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ottolab {

// Error taxonomy, mapped to CLI exit codes by the runner:
//   ConfigError / CurvatureError -> 2, NumericalError / SolverError -> 1, IoError -> 3.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CurvatureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& msg, double last_residual)
        : std::runtime_error(msg), residual(last_residual) {}
    double residual = 0.0;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// splitmix64: the single documented RNG behind every randomized check.
// Reference sequence: seed 0 -> e220a8397b1dcdaf, 6e789e6aa1b965f4, ...
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, m)
    std::uint64_t below(std::uint64_t m) { return next() % m; }

private:
    std::uint64_t state_;
};

// Fixed float formatting used by every CSV/JSON writer: 17 significant
// digits, lowercase scientific. Byte-deterministic across runs.
std::string format_float(double x);

std::string format_int(long long x);

// log with a positive floor; keeps log-domain pipelines NaN-free when a
// density underflows to zero far in a Gaussian tail.
double safe_log(double x);

// (1 - exp(-2 rho T)) / (2 rho) and (exp(2 rho T) - 1) / (2 rho),
// with the analytic limit T at rho = 0 (computed via expm1, so the
// |rho T| -> 0 regime is exact to rounding).
double contraction_coefficient(double rho, double T);
double expansion_coefficient(double rho, double T);

// Minimal deterministic JSON writer (insertion-ordered objects, floats via
// format_float). The report schema is flat enough that a full JSON library
// is not needed on the write path.
class JsonWriter {
public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array(const std::string& key);
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(const std::string& k);
    JsonWriter& value(double v);
    JsonWriter& value(const std::string& v);
    JsonWriter& value(const char* v) { return value(std::string(v)); }
    JsonWriter& value(long long v);
    JsonWriter& value(int v) { return value(static_cast<long long>(v)); }
    JsonWriter& value(bool v);
    JsonWriter& field(const std::string& k, double v) { key(k); return value(v); }
    JsonWriter& field(const std::string& k, const std::string& v) { key(k); return value(v); }
    JsonWriter& field(const std::string& k, const char* v) { key(k); return value(std::string(v)); }
    JsonWriter& field(const std::string& k, long long v) { key(k); return value(v); }
    JsonWriter& field(const std::string& k, int v) { key(k); return value(static_cast<long long>(v)); }
    JsonWriter& field(const std::string& k, bool v) { key(k); return value(v); }
    std::string str() const { return out_; }

private:
    void separator();
    std::string out_;
    std::vector<bool> first_in_scope_;
    bool pending_key_ = false;
};

// Writes text to path atomically enough for our purposes; throws IoError.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
void ensure_directory(const std::string& path);

}  // namespace ottolab
