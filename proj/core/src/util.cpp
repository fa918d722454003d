#include "ottolab/util.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ottolab {

std::string format_float(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", x);
    return buf;
}

std::string format_int(long long x) { return std::to_string(x); }

double safe_log(double x) { return std::log(x < 1e-300 ? 1e-300 : x); }

double contraction_coefficient(double rho, double T) {
    if (rho == 0.0) return T;
    return -std::expm1(-2.0 * rho * T) / (2.0 * rho);
}

double expansion_coefficient(double rho, double T) {
    if (rho == 0.0) return T;
    return std::expm1(2.0 * rho * T) / (2.0 * rho);
}

void JsonWriter::separator() {
    if (!first_in_scope_.empty()) {
        if (!first_in_scope_.back()) out_ += ",";
        first_in_scope_.back() = false;
    }
}

JsonWriter& JsonWriter::begin_object() {
    if (!pending_key_) separator();
    pending_key_ = false;
    out_ += "{";
    first_in_scope_.push_back(true);
    return *this;
}

JsonWriter& JsonWriter::end_object() {
    out_ += "}";
    first_in_scope_.pop_back();
    return *this;
}

JsonWriter& JsonWriter::begin_array(const std::string& k) {
    key(k);
    return begin_array();
}

JsonWriter& JsonWriter::begin_array() {
    if (!pending_key_) separator();
    pending_key_ = false;
    out_ += "[";
    first_in_scope_.push_back(true);
    return *this;
}

JsonWriter& JsonWriter::end_array() {
    out_ += "]";
    first_in_scope_.pop_back();
    return *this;
}

static std::string escape_json(const std::string& s) {
    std::string r;
    r.reserve(s.size() + 8);
    for (char c : s) {
        switch (c) {
            case '"': r += "\\\""; break;
            case '\\': r += "\\\\"; break;
            case '\n': r += "\\n"; break;
            case '\t': r += "\\t"; break;
            case '\r': r += "\\r"; break;
            default: r += c;
        }
    }
    return r;
}

JsonWriter& JsonWriter::key(const std::string& k) {
    separator();
    out_ += "\"" + escape_json(k) + "\":";
    pending_key_ = true;
    return *this;
}

JsonWriter& JsonWriter::value(double v) {
    if (!pending_key_) separator();
    pending_key_ = false;
    if (std::isnan(v)) {
        out_ += "\"nan\"";
    } else if (std::isinf(v)) {
        out_ += v > 0 ? "\"inf\"" : "\"-inf\"";
    } else {
        out_ += format_float(v);
    }
    return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
    if (!pending_key_) separator();
    pending_key_ = false;
    out_ += "\"" + escape_json(v) + "\"";
    return *this;
}

JsonWriter& JsonWriter::value(long long v) {
    if (!pending_key_) separator();
    pending_key_ = false;
    out_ += format_int(v);
    return *this;
}

JsonWriter& JsonWriter::value(bool v) {
    if (!pending_key_) separator();
    pending_key_ = false;
    out_ += v ? "true" : "false";
    return *this;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw IoError("cannot create directory " + path + ": " + ec.message());
}

}  // namespace ottolab
