#include "lsfusion/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "lsfusion/errors.hpp"
#include "lsfusion/png_io.hpp"

namespace lsfusion {

int default_segment_target(int height, int width) {
    return std::max(1, static_cast<int>(std::lround(height * static_cast<double>(width) / 780.0)));
}

namespace {

// Opponent transform scaled to lab-like magnitudes.
struct ColorPlanes {
    Grid<double> c1, c2, c3;
};

ColorPlanes opponent_color(const RgbImage& img) {
    const int h = img[0].height(), w = img[0].width();
    ColorPlanes p{Grid<double>(h, w), Grid<double>(h, w), Grid<double>(h, w)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double r = img[0].at(y, x), g = img[1].at(y, x), b = img[2].at(y, x);
            p.c1.at(y, x) = 100.0 * (0.299 * r + 0.587 * g + 0.114 * b);
            p.c2.at(y, x) = 100.0 * (r - g);
            p.c3.at(y, x) = 100.0 * (b - 0.5 * (r + g));
        }
    return p;
}

struct Center {
    double c1 = 0, c2 = 0, c3 = 0;
    double x = 0, y = 0;
};

}  // namespace

SuperpixelSegmentation slic_segment(const RgbImage& img, int target_segments, double compactness,
                                    int iterations) {
    const int h = img[0].height(), w = img[0].width();
    if (h < 16 || w < 16) throw std::invalid_argument("slic_segment: image smaller than 16x16");
    if (target_segments < 1 || target_segments > h * w)
        throw std::invalid_argument("slic_segment: target_segments out of range");

    const double spacing = std::sqrt(static_cast<double>(h) * w / target_segments);
    const ColorPlanes color = opponent_color(img);

    // Grid-seeded centers.
    const int nx = std::max(1, static_cast<int>(std::lround(w / spacing)));
    const int ny = std::max(1, static_cast<int>(std::lround(h / spacing)));
    std::vector<Center> centers;
    centers.reserve(static_cast<size_t>(nx) * ny);
    for (int i = 0; i < ny; ++i)
        for (int j = 0; j < nx; ++j) {
            Center c;
            // Mean pixel index of the cell, so exact ties cannot stack shared
            // boundaries onto the lowest cluster id.
            c.x = (j + 0.5) * w / nx - 0.5;
            c.y = (i + 0.5) * h / ny - 0.5;
            const int px = std::clamp(static_cast<int>(c.x + 0.5), 0, w - 1);
            const int py = std::clamp(static_cast<int>(c.y + 0.5), 0, h - 1);
            c.c1 = color.c1.at(py, px);
            c.c2 = color.c2.at(py, px);
            c.c3 = color.c3.at(py, px);
            centers.push_back(c);
        }

    const double spatial_w = compactness / spacing;
    const double search = 1.0001 * spacing;  // 2S x 2S window around each center
    Grid<int> labels(h, w, -1);

    for (int iter = 0; iter < iterations; ++iter) {
        // Assignment as a per-pixel gather over nearby centers (deterministic
        // regardless of evaluation order; ties go to the lowest center id).
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int cj = std::min(nx - 1, static_cast<int>(x * nx / w));
                const int ci = std::min(ny - 1, static_cast<int>(y * ny / h));
                double best = std::numeric_limits<double>::max();
                int best_id = -1;
                for (int di = -2; di <= 2; ++di)
                    for (int dj = -2; dj <= 2; ++dj) {
                        const int ii = ci + di, jj = cj + dj;
                        if (ii < 0 || ii >= ny || jj < 0 || jj >= nx) continue;
                        const int id = ii * nx + jj;
                        const Center& c = centers[id];
                        if (std::abs(c.x - x) > search || std::abs(c.y - y) > search) continue;
                        const double d1 = color.c1.at(y, x) - c.c1;
                        const double d2 = color.c2.at(y, x) - c.c2;
                        const double d3 = color.c3.at(y, x) - c.c3;
                        const double dx = x - c.x, dy = y - c.y;
                        const double dist = std::sqrt(d1 * d1 + d2 * d2 + d3 * d3) +
                                            spatial_w * std::sqrt(dx * dx + dy * dy);
                        if (dist < best || (dist == best && id < best_id)) {
                            best = dist;
                            best_id = id;
                        }
                    }
                labels.at(y, x) = best_id;
            }

        // Update step: cluster means.
        std::vector<double> s1(centers.size(), 0), s2(centers.size(), 0), s3(centers.size(), 0);
        std::vector<double> sx(centers.size(), 0), sy(centers.size(), 0);
        std::vector<int> count(centers.size(), 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int id = labels.at(y, x);
                if (id < 0) continue;
                s1[id] += color.c1.at(y, x);
                s2[id] += color.c2.at(y, x);
                s3[id] += color.c3.at(y, x);
                sx[id] += x;
                sy[id] += y;
                ++count[id];
            }
        for (size_t i = 0; i < centers.size(); ++i) {
            if (count[i] == 0) continue;
            centers[i].c1 = s1[i] / count[i];
            centers[i].c2 = s2[i] / count[i];
            centers[i].c3 = s3[i] / count[i];
            centers[i].x = sx[i] / count[i];
            centers[i].y = sy[i] / count[i];
        }
    }

    // Connectivity enforcement. Flood-fill 4-connected components of the
    // label map, keep the dominant component of every cluster (plus large
    // fragments while the count bound allows), then merge the rest into the
    // adjacent component sharing the most boundary edges.
    Grid<int> comp(h, w, -1);
    struct Component {
        int id = 0;
        int label = -1;
        int size = 0;
        int first_pixel = 0;
        std::vector<int> pixels;
    };
    std::vector<Component> comps;
    {
        std::vector<int> stack;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (comp.at(y, x) != -1) continue;
                const int label = labels.at(y, x);
                Component c;
                c.id = static_cast<int>(comps.size());
                c.label = label;
                c.first_pixel = y * w + x;
                stack.push_back(y * w + x);
                comp.at(y, x) = c.id;
                while (!stack.empty()) {
                    const int p = stack.back();
                    stack.pop_back();
                    c.pixels.push_back(p);
                    ++c.size;
                    const int py = p / w, px = p % w;
                    const int dy4[4] = {-1, 1, 0, 0}, dx4[4] = {0, 0, -1, 1};
                    for (int k = 0; k < 4; ++k) {
                        const int qy = py + dy4[k], qx = px + dx4[k];
                        if (qy < 0 || qy >= h || qx < 0 || qx >= w) continue;
                        if (comp.at(qy, qx) != -1 || labels.at(qy, qx) != label) continue;
                        comp.at(qy, qx) = c.id;
                        stack.push_back(qy * w + qx);
                    }
                }
                comps.push_back(c);
            }
    }

    const double min_size = spacing * spacing / 4.0;
    std::vector<uint8_t> kept(comps.size(), 0);
    {
        // Dominant component per cluster label.
        std::map<int, int> main_comp;  // label -> component id
        for (const Component& c : comps) {
            auto it = main_comp.find(c.label);
            if (it == main_comp.end() || comps[it->second].size < c.size ||
                (comps[it->second].size == c.size && c.first_pixel < comps[it->second].first_pixel))
                main_comp[c.label] = c.id;
        }
        for (auto& [label, id] : main_comp) kept[id] = 1;

        // Large orphan fragments may stay as segments of their own while the
        // total stays within twice the requested count.
        std::vector<int> candidates;
        for (const Component& c : comps)
            if (!kept[c.id] && c.size >= min_size) candidates.push_back(c.id);
        std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
            if (comps[a].size != comps[b].size) return comps[a].size > comps[b].size;
            return comps[a].first_pixel < comps[b].first_pixel;
        });
        size_t kept_count = main_comp.size();
        for (int id : candidates) {
            if (kept_count >= 2 * static_cast<size_t>(target_segments)) break;
            kept[id] = 1;
            ++kept_count;
        }
    }

    // Merge every non-kept component into an adjacent resolved component.
    std::vector<int> resolve(comps.size());
    for (size_t i = 0; i < comps.size(); ++i) resolve[i] = kept[i] ? static_cast<int>(i) : -1;
    {
        std::vector<int> pending;
        for (size_t i = 0; i < comps.size(); ++i)
            if (!kept[i]) pending.push_back(static_cast<int>(i));
        std::sort(pending.begin(), pending.end(), [&](int a, int b) {
            if (comps[a].size != comps[b].size) return comps[a].size < comps[b].size;
            return comps[a].first_pixel < comps[b].first_pixel;
        });
        bool progress = true;
        while (!pending.empty() && progress) {
            progress = false;
            std::vector<int> next;
            for (int id : pending) {
                // Count shared boundary with resolved neighbors.
                std::map<int, int> shared;
                for (int p : comps[id].pixels) {
                    const int y = p / w, x = p % w;
                    const int dy4[4] = {-1, 1, 0, 0}, dx4[4] = {0, 0, -1, 1};
                    for (int k = 0; k < 4; ++k) {
                        const int qy = y + dy4[k], qx = x + dx4[k];
                        if (qy < 0 || qy >= h || qx < 0 || qx >= w) continue;
                        const int nc = comp.at(qy, qx);
                        if (nc == id || resolve[nc] < 0) continue;
                        ++shared[resolve[nc]];
                    }
                }
                if (shared.empty()) {
                    next.push_back(id);
                    continue;
                }
                int best = -1, best_count = -1;
                for (const auto& [target, count] : shared)
                    if (count > best_count || (count == best_count && target < best)) {
                        best = target;
                        best_count = count;
                    }
                resolve[id] = best;
                progress = true;
            }
            pending.swap(next);
        }
        // Isolated leftovers (cannot happen with a connected image grid, but
        // keep the invariant anyway): attach to the first kept component.
        for (size_t i = 0; i < comps.size(); ++i)
            if (resolve[i] < 0)
                for (size_t j = 0; j < comps.size(); ++j)
                    if (kept[j]) {
                        resolve[i] = static_cast<int>(j);
                        break;
                    }
    }

    // Contiguous ids in raster order of each segment's first pixel.
    SuperpixelSegmentation seg;
    seg.labels = Grid<int>(h, w, -1);
    std::vector<int> remap(comps.size(), -1);
    int next_id = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int root = resolve[comp.at(y, x)];
            if (remap[root] == -1) remap[root] = next_id++;
            seg.labels.at(y, x) = remap[root];
        }
    seg.segment_count = next_id;
    seg.segment_pixels.assign(next_id, {});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) seg.segment_pixels[seg.labels.at(y, x)].push_back(y * w + x);
    return seg;
}

void save_label_png(const std::string& path, const SuperpixelSegmentation& seg) {
    Grid<uint16_t> raw(seg.height(), seg.width(), 0);
    for (int y = 0; y < seg.height(); ++y)
        for (int x = 0; x < seg.width(); ++x)
            raw.at(y, x) = static_cast<uint16_t>(std::min(seg.labels.at(y, x), 65535));
    write_png_gray16(path, raw);
}

}  // namespace lsfusion
