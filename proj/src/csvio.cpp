#include "nullfold/csvio.hpp"

#include <cstdio>
#include <fstream>

#include "nullfold/errors.hpp"

namespace nullfold {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return std::string(buf);
}

namespace {

std::ofstream open_or_throw(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw LabError("cannot open file for writing: " + path);
    }
    return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out = open_or_throw(path);
    const std::size_t n = traj.size();
    const int dim = n > 0 ? static_cast<int>(traj.states[0].size()) : 0;

    out << "t";
    for (int j = 0; j < dim; ++j) out << ",x" << j;
    out << ",psi,vs_norm,phi_residual,dist_sigma\n";

    auto field = [&](const std::vector<double>& col, std::size_t i) {
        return col.size() == n ? format_double(col[i]) : std::string();
    };
    for (std::size_t i = 0; i < n; ++i) {
        out << format_double(traj.times[i]);
        for (int j = 0; j < dim; ++j) {
            out << ',' << format_double(traj.states[i](j));
        }
        out << ',' << field(traj.psi, i);
        out << ',' << field(traj.vs_norm, i);
        out << ',' << field(traj.phi_residual, i);
        out << ',' << field(traj.dist_sigma, i);
        out << '\n';
    }
}

void write_reduced_csv(const std::string& path, const ReducedTrajectory& reduced) {
    std::ofstream out = open_or_throw(path);
    const int dim =
        reduced.states.empty() ? 0 : static_cast<int>(reduced.states[0].size());
    out << "t";
    for (int j = 0; j < dim; ++j) out << ",x" << j;
    out << '\n';
    for (std::size_t i = 0; i < reduced.size(); ++i) {
        out << format_double(reduced.times[i]);
        for (int j = 0; j < dim; ++j) {
            out << ',' << format_double(reduced.states[i](j));
        }
        out << '\n';
    }
}

void write_points_csv(const std::string& path, const std::vector<Vec>& points) {
    std::ofstream out = open_or_throw(path);
    const int dim = points.empty() ? 0 : static_cast<int>(points[0].size());
    for (int j = 0; j < dim; ++j) {
        out << (j == 0 ? "" : ",") << 'x' << j;
    }
    out << '\n';
    for (const Vec& p : points) {
        for (int j = 0; j < dim; ++j) {
            out << (j == 0 ? "" : ",") << format_double(p(j));
        }
        out << '\n';
    }
}

}  // namespace nullfold
