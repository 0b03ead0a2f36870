#pragma once

#include "inls/evolution.hpp"
#include "inls/grid.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace inls::io {

class FileFormat : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Columns r, re, im with a header line. Values use 17 significant digits.
void write_field_csv(const std::filesystem::path& path, const RadialField& f);
/// Reads a field written by write_field_csv; the grid is rebuilt from the node
/// positions, so the file must hold a cell-centred grid of dimension N.
RadialField read_field_csv(const std::filesystem::path& path, int N);

/// Little-endian binary: int64 M, float64 r_max, int64 N, then M pairs of
/// float64 (re, im).
void write_snapshot(const std::filesystem::path& path, const RadialField& f);
RadialField read_snapshot(const std::filesystem::path& path);

/// Columns t, mass, kinetic, potential, energy, virial, action, sup_norm, morawetz, dt.
void write_series_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_text_atomic(const std::filesystem::path& path, const std::string& contents);

/// Formats a double with 17 significant digits (round-trip exact).
std::string fmt(double x);

}  // namespace inls::io
