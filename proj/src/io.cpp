#include "lab/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace lab {
namespace io {

namespace {
std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

void write_field_csv(const LatticeField& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_field_csv: cannot open " + path);
    os << "x,q\n";
    const double dx = f.dx();
    for (int j = 0; j < f.n(); ++j) {
        double x = f.periodic ? f.grid.x(j) : j * dx;
        os << fmt17(x) << "," << fmt17(f.v[j]) << "\n";
    }
}

LatticeField read_field_csv(const std::string& path, double L, bool periodic) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_field_csv: cannot open " + path);
    std::string line;
    std::getline(is, line);  // header
    std::vector<double> vals;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("read_field_csv: bad row");
        vals.push_back(std::stod(line.substr(comma + 1)));
    }
    LatticeField f;
    f.periodic = periodic;
    f.grid.L = L;
    f.grid.n = (int)vals.size();
    f.v = std::move(vals);
    if (periodic && (f.grid.n % 2 != 0))
        throw std::runtime_error("read_field_csv: periodic fields need even n");
    return f;
}

void append_field_jsonl(const LatticeField& f, uint64_t seed, const std::string& path) {
    nlohmann::json j;
    j["seed"] = seed;
    j["L"] = f.grid.L;
    j["periodic"] = f.periodic;
    j["values"] = f.v;
    std::ofstream os(path, std::ios::app);
    os << j.dump() << "\n";
}

void write_greens_csv(const TorusGrid& grid, const DiagGreens& dg, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_greens_csv: cannot open " + path);
    os << "x,gamma,gplus,gminus\n";
    for (int j = 0; j < grid.n; ++j)
        os << fmt17(grid.x(j)) << "," << fmt17(dg.gamma[j]) << "," << fmt17(dg.gplus[j])
           << "," << fmt17(dg.gminus[j]) << "\n";
}

void write_trajectory(const FlowTrajectory& traj, const std::string& dir,
                      const std::string& extra) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "snapshots");
    nlohmann::json man = nlohmann::json::parse(extra);
    man["flow"] = (traj.kind == FlowKind::Hk) ? "hk" : "mkdv";
    if (traj.kind == FlowKind::Hk) man["kappa"] = traj.kappa;
    man["dt"] = traj.dt;
    man["steps"] = (int)traj.snapshots.size() - 1;
    man["L"] = traj.snapshots.at(0).grid.L;
    man["n"] = traj.snapshots.at(0).n();
    man["conservation_ok"] = traj.conservation_ok;
    write_text((fs::path(dir) / "manifest.json").string(), man.dump(2) + "\n");
    write_text((fs::path(dir) / "ledger.csv").string(), traj.ledger.to_csv());
    for (size_t s = 0; s < traj.snapshots.size(); ++s) {
        char name[32];
        std::snprintf(name, sizeof name, "%04zu.csv", s);
        write_field_csv(traj.snapshots[s], (fs::path(dir) / "snapshots" / name).string());
    }
}

std::string read_text(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_text: cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_text: cannot open " + path);
    os << content;
}

}  // namespace io
}  // namespace lab
