#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace ottolab {

// One evaluated inequality: lhs <= rhs with slack = rhs - lhs, so slack >= 0
// means pass regardless of how the source inequality was oriented.
struct InequalityReport {
    std::string name;
    std::string where = "integrated";  // "integrated" or "point <i>"
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    // metadata
    double T = std::numeric_limits<double>::quiet_NaN();
    double rho = std::numeric_limits<double>::quiet_NaN();
    double dim_n = std::numeric_limits<double>::quiet_NaN();
    std::string scenario;
    std::string note;            // e.g. flags a restored formula reading
    bool informational = false;  // side-by-side variants; never gate pass/fail

    static InequalityReport make(std::string name, double lhs, double rhs,
                                 double tolerance, std::string where = "integrated") {
        InequalityReport r;
        r.name = std::move(name);
        r.lhs = lhs;
        r.rhs = rhs;
        r.slack = rhs - lhs;
        r.tolerance = tolerance;
        r.pass = r.slack >= -tolerance && std::isfinite(r.slack);
        r.where = std::move(where);
        return r;
    }
};

// Pointwise evaluators return the whole profile plus the worst point.
struct PointwiseReport {
    InequalityReport worst;                // located at the minimum-slack point
    std::vector<double> lhs, rhs;          // per evaluated grid point
    std::vector<int> points;               // grid indices evaluated (interior mask)
    bool pass() const { return worst.pass; }
};

// Delta-limit experiment: integrated bridge quantities against shrinking
// bumps versus the pointwise local quantity at the bump center.
struct DeltaLimitRecord {
    std::string inequality;
    int center_index = 0;
    double T = 0.0;
    std::vector<double> widths;
    std::vector<double> bridge_lhs, bridge_rhs;
    double local_lhs = 0.0, local_rhs = 0.0;
    std::vector<double> gap_lhs, gap_rhs;
};

}  // namespace ottolab
