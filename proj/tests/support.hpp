// Shared helpers for the test suites.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gmface/model.hpp"
#include "gmface/transform.hpp"

namespace gmtest {

inline std::filesystem::path data_dir() { return GMFACE_TEST_DATA_DIR; }
inline std::string cli_path() { return GMFACE_CLI_PATH; }

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("gmface_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Reference 80-component model published in precision-matrix form
// (w, mu1, mu2, a11, a12, a22 per row); converted to the canonical Cholesky
// parameterization on load.
inline gmface::GmModel load_reference_model(int height = 120, int width = 120) {
    std::ifstream in(data_dir() / "common80_precision.csv");
    if (!in) throw std::runtime_error("missing common80_precision.csv");
    std::string line;
    std::getline(in, line);  // header
    gmface::GmModel model;
    model.height = height;
    model.width = width;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        double vals[6];
        for (double& v : vals) {
            std::getline(row, cell, ',');
            v = std::stod(cell);
        }
        gmface::GaussianComponent comp;
        comp.w = vals[0];
        comp.mu = {vals[1], vals[2]};
        comp.chol = gmface::cholesky2({vals[3], vals[4], vals[5]});
        model.components.push_back(comp);
    }
    return model;
}

// Seeded random model with moderately sized bells, for property tests.
inline gmface::GmModel random_model(std::mt19937_64& rng, int m, int height, int width) {
    std::uniform_real_distribution<double> mu_dist(0.1, 0.9);
    std::uniform_real_distribution<double> diag_dist(2.0, 12.0);
    std::uniform_real_distribution<double> off_dist(-3.0, 3.0);
    std::uniform_real_distribution<double> w_dist(-0.8, 0.8);
    gmface::GmModel model;
    model.height = height;
    model.width = width;
    for (int i = 0; i < m; ++i) {
        gmface::GaussianComponent comp;
        comp.w = w_dist(rng);
        comp.mu = {mu_dist(rng), mu_dist(rng)};
        comp.chol = {diag_dist(rng), off_dist(rng), diag_dist(rng)};
        model.components.push_back(comp);
    }
    return model;
}

inline gmface::ImageGrid random_target(std::mt19937_64& rng, int height, int width) {
    std::uniform_real_distribution<double> pix(0.0, 1.0);
    gmface::ImageGrid grid = gmface::ImageGrid::zeros(height, width);
    for (double& p : grid.pixels) p = pix(rng);
    return grid;
}

inline int run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args;
    const int status = std::system(cmd.c_str());
    if (status < 0) return -1;
    return WEXITSTATUS(status);
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

}  // namespace gmtest
