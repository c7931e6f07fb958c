#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pfl {

// Periodic rectangular grid. Sizes must be even (keeps the Nyquist mode
// unambiguous); spacing is dimensionless and defaults to 1.
struct GridSpec {
    int nx = 0;
    int ny = 0;
    double dx = 1.0;
    double dy = 1.0;

    int size() const { return nx * ny; }

    bool operator==(const GridSpec& o) const {
        return nx == o.nx && ny == o.ny && dx == o.dx && dy == o.dy;
    }

    void validate() const {
        if (nx < 2 || ny < 2) throw std::invalid_argument("GridSpec: nx, ny must be >= 2");
        if (nx % 2 != 0 || ny % 2 != 0) throw std::invalid_argument("GridSpec: nx, ny must be even");
        if (!(dx > 0.0) || !(dy > 0.0)) throw std::invalid_argument("GridSpec: dx, dy must be > 0");
    }
};

// Real scalar field on a periodic grid, row-major: values[iy*nx + ix].
struct Field2D {
    GridSpec grid;
    std::vector<double> values;

    Field2D() = default;
    explicit Field2D(const GridSpec& g, double fill = 0.0)
        : grid(g), values(static_cast<std::size_t>(g.size()), fill) {}

    double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * grid.nx + ix]; }
    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * grid.nx + ix]; }

    double mean() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s / static_cast<double>(values.size());
    }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

}  // namespace pfl
