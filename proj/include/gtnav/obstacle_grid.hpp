#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gtnav/geometry.hpp"

namespace gtnav {

/**
 * @brief Binary occupancy map of the static obstacle space.
 *
 * Cells are squares of side cell_size; cell (cx, cy) covers
 * [origin + (cx, cy)*s, origin + (cx+1, cy+1)*s) and its center sits at
 * origin + (cx+0.5, cy+0.5)*s. Row cy = 0 is the bottom row.
 *
 * The plain-text file format is:
 *   line 1: width_cells height_cells cell_size_m origin_x origin_y
 *   then height_cells rows of width_cells 0/1 digits (optionally
 *   space-separated), listed top row first. '#' starts a comment.
 */
class ObstacleGrid {
public:
    ObstacleGrid() = default;

    ObstacleGrid(int width_cells, int height_cells, double cell_size, Vec2 origin = {})
        : width_(width_cells), height_(height_cells), cell_size_(cell_size), origin_(origin) {
        if (width_cells <= 0 || height_cells <= 0)
            throw DomainError("ObstacleGrid: dimensions must be positive");
        if (!(cell_size > 0.0)) throw DomainError("ObstacleGrid: cell_size must be > 0");
        occupancy_.assign(static_cast<std::size_t>(width_) * height_, 0);
    }

    int width_cells() const { return width_; }
    int height_cells() const { return height_; }
    double cell_size() const { return cell_size_; }
    Vec2 origin() const { return origin_; }
    bool empty() const { return occupied_count_ == 0; }
    int occupied_count() const { return occupied_count_; }

    Vec2 extent_min() const { return origin_; }
    Vec2 extent_max() const { return origin_ + Vec2(width_ * cell_size_, height_ * cell_size_); }

    bool in_bounds(int cx, int cy) const {
        return cx >= 0 && cx < width_ && cy >= 0 && cy < height_;
    }

    bool occupied(int cx, int cy) const {
        return in_bounds(cx, cy) && occupancy_[index(cx, cy)] != 0;
    }

    void set_occupied(int cx, int cy, bool value) {
        if (!in_bounds(cx, cy)) throw DomainError("ObstacleGrid::set_occupied: cell out of bounds");
        auto& cell = occupancy_[index(cx, cy)];
        occupied_count_ += (value ? 1 : 0) - (cell ? 1 : 0);
        cell = value ? 1 : 0;
    }

    Vec2 cell_center(int cx, int cy) const {
        return origin_ + Vec2((cx + 0.5) * cell_size_, (cy + 0.5) * cell_size_);
    }

    /// Cell containing p; may lie outside the grid bounds.
    std::pair<int, int> cell_of(const Vec2& p) const {
        return {static_cast<int>(std::floor((p.x - origin_.x) / cell_size_)),
                static_cast<int>(std::floor((p.y - origin_.y) / cell_size_))};
    }

    /// Whether p lies inside the obstacle space (an occupied cell).
    bool point_in_obstacle(const Vec2& p) const {
        auto [cx, cy] = cell_of(p);
        return occupied(cx, cy);
    }

    /**
     * @brief Center of the occupied cell nearest to p, or nullopt if the
     * grid has no occupied cell.
     *
     * Exact Euclidean nearest; ties resolve to the smallest (cy, cx), the
     * same cell a row-major full scan keeping the first strict minimum
     * would return.
     */
    std::optional<Vec2> nearest_obstacle_point(const Vec2& p) const {
        if (occupied_count_ == 0) return std::nullopt;
        auto [pcx, pcy] = cell_of(p);
        pcx = std::clamp(pcx, 0, width_ - 1);
        pcy = std::clamp(pcy, 0, height_ - 1);

        double best_d2 = std::numeric_limits<double>::infinity();
        int best_cx = -1, best_cy = -1;
        const int max_ring = std::max(width_, height_);

        for (int r = 0;; ++r) {
            // Cells in ring r are at least (r - 0.5) * cell_size away from p.
            if (r > 0 && best_cx >= 0) {
                const double lower = (r - 0.5) * cell_size_;
                if (lower * lower >= best_d2) break;
            }
            if (r > max_ring) break;
            const int x0 = pcx - r, x1 = pcx + r;
            const int y0 = pcy - r, y1 = pcy + r;
            auto consider = [&](int cx, int cy) {
                if (!occupied(cx, cy)) return;
                const Vec2 c = cell_center(cx, cy);
                const double dx = p.x - c.x, dy = p.y - c.y;
                const double d2 = dx * dx + dy * dy;
                if (d2 < best_d2 ||
                    (d2 == best_d2 && (cy < best_cy || (cy == best_cy && cx < best_cx)))) {
                    best_d2 = d2;
                    best_cx = cx;
                    best_cy = cy;
                }
            };
            if (r == 0) {
                consider(pcx, pcy);
                continue;
            }
            for (int cx = x0; cx <= x1; ++cx) {
                consider(cx, y0);
                consider(cx, y1);
            }
            for (int cy = y0 + 1; cy <= y1 - 1; ++cy) {
                consider(x0, cy);
                consider(x1, cy);
            }
        }
        if (best_cx < 0) return std::nullopt;
        return cell_center(best_cx, best_cy);
    }

    /// Whether the straight segment a->b passes through any occupied cell.
    /// Sampled at quarter-cell resolution including both endpoints.
    bool segment_hits_obstacle(const Vec2& a, const Vec2& b) const {
        if (occupied_count_ == 0) return false;
        const double len = distance(a, b);
        const double step = cell_size_ * 0.25;
        const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
        for (int i = 0; i <= n; ++i) {
            const double t = static_cast<double>(i) / n;
            if (point_in_obstacle(a + (b - a) * t)) return true;
        }
        return false;
    }

    static ObstacleGrid load(std::istream& in) {
        std::string line;
        int line_no = 0;
        auto next_content_line = [&]() -> std::string {
            while (std::getline(in, line)) {
                ++line_no;
                const auto hash = line.find('#');
                std::string body = hash == std::string::npos ? line : line.substr(0, hash);
                if (body.find_first_not_of(" \t\r\n") != std::string::npos) return body;
            }
            return {};
        };

        std::istringstream header(next_content_line());
        int w = 0, h = 0;
        double s = 0.0, ox = 0.0, oy = 0.0;
        if (!(header >> w >> h >> s >> ox >> oy))
            throw ParseError("grid header must be: width height cell_size origin_x origin_y", line_no);
        if (w <= 0 || h <= 0 || !(s > 0.0))
            throw ParseError("grid header has non-positive dimensions", line_no);

        ObstacleGrid grid(w, h, s, {ox, oy});
        for (int row = 0; row < h; ++row) {
            std::string body = next_content_line();
            if (body.empty()) throw ParseError("grid file truncated: missing occupancy row", line_no);
            int cx = 0;
            const int cy = h - 1 - row; // rows are listed top first
            for (char c : body) {
                if (c == ' ' || c == '\t' || c == '\r') continue;
                if (c != '0' && c != '1')
                    throw ParseError(std::string("invalid occupancy character '") + c + "'", line_no);
                if (cx >= w) throw ParseError("occupancy row longer than grid width", line_no);
                if (c == '1') grid.set_occupied(cx, cy, true);
                ++cx;
            }
            if (cx != w) throw ParseError("occupancy row shorter than grid width", line_no);
        }
        return grid;
    }

    static ObstacleGrid load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open grid file: " + path);
        return load(in);
    }

    void save(std::ostream& out) const {
        out << width_ << ' ' << height_ << ' ' << cell_size_ << ' ' << origin_.x << ' ' << origin_.y
            << '\n';
        for (int row = 0; row < height_; ++row) {
            const int cy = height_ - 1 - row;
            for (int cx = 0; cx < width_; ++cx) out << (occupied(cx, cy) ? '1' : '0');
            out << '\n';
        }
    }

private:
    std::size_t index(int cx, int cy) const {
        return static_cast<std::size_t>(cy) * width_ + cx;
    }

    int width_ = 0;
    int height_ = 0;
    double cell_size_ = 1.0;
    Vec2 origin_;
    std::vector<std::uint8_t> occupancy_;
    int occupied_count_ = 0;
};

} // namespace gtnav
