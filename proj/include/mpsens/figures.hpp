#pragma once

#include "mpsens/harness.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mpsens {

enum class Figure { fig2, fig3, fig4, figA1, figB1, figC1 };

[[nodiscard]] std::string to_string(Figure f);
[[nodiscard]] Figure      parse_figure(const std::string &s);

struct FigureOptions {
    Index               bins = 100;
    Index               r    = 1;
    double              d    = 2;
    std::vector<double> chi_min;                  // figB1; empty: every chi leaving 3 points
    std::vector<int>    k{2, 3, 4};               // figA1
    std::vector<double> analytic_chi{2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
    bool                svg = true;
};

/// Reads minfo.csv / spectra.csv from each dataset directory as needed and
/// writes <figure>_*.csv (plus an .svg when opts.svg) into `out`. figA1 needs
/// no dataset. Returns the files written.
std::vector<std::filesystem::path> emit_figure_data(const std::vector<std::filesystem::path> &datasets, Figure fig,
                                                    const std::filesystem::path &out, const FigureOptions &opts = {});

struct SvgSeries {
    std::string         label;
    std::vector<double> x, y;
};

struct SvgPlot {
    std::string            title, xlabel, ylabel;
    std::vector<SvgSeries> series;
    std::vector<double>    vlines;
    bool                   logx = false;
};

void write_svg(const std::filesystem::path &path, const SvgPlot &plot);

} // namespace mpsens
