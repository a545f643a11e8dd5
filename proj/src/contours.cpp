// Marching squares on a periodic N x N sample of one band sheet.
//
// Corners are classified as above (value >= level) or below. Every grid edge
// with a sign change carries exactly one crossing point and is shared by two
// cells, so the segments link into cycles on the torus. Walking a cycle in
// unwrapped cell coordinates yields either a contractible loop or a loop that
// ends on an integer translate of its start.

#include "bloch/spectral_measures.hpp"

#include "bloch/errors.hpp"

#include <map>
#include <stdexcept>

namespace bloch {

namespace {

struct EdgeKey {
    int type; // 0: along k1 (between (i,j) and (i+1,j)), 1: along k2
    long i;
    long j;
    friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

struct Segment {
    long ci, cj;     // wrapped cell
    int edge_a, edge_b; // local edge ids 0..3
};

// Local edges of cell (i,j): 0 bottom, 1 right, 2 top, 3 left.
EdgeKey edge_key(long i, long j, int local, long n)
{
    auto wrap = [n](long v) { return ((v % n) + n) % n; };
    switch (local) {
    case 0: return {0, wrap(i), wrap(j)};
    case 1: return {1, wrap(i + 1), wrap(j)};
    case 2: return {0, wrap(i), wrap(j + 1)};
    default: return {1, wrap(i), wrap(j)};
    }
}

constexpr long step_i[4] = {0, 1, 0, -1};
constexpr long step_j[4] = {-1, 0, 1, 0};

} // namespace

std::vector<ContourPolyline> periodic_isolines(std::span<const double> values, int n, double level, int band)
{
    if (n < 2 || values.size() != static_cast<std::size_t>(n) * n)
        throw InputError("periodic_isolines: need an N x N sheet with N >= 2");
    auto value = [&](long i, long j) {
        i = ((i % n) + n) % n;
        j = ((j % n) + n) % n;
        return values[static_cast<std::size_t>(i * n + j)];
    };
    // Corner values of cell (i,j) in counter-clockwise order.
    auto corners = [&](long i, long j) {
        return std::array<double, 4>{value(i, j), value(i + 1, j), value(i + 1, j + 1), value(i, j + 1)};
    };

    std::vector<Segment> segments;
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) {
            const auto c = corners(i, j);
            bool above[4];
            for (int q = 0; q < 4; ++q) above[q] = c[q] >= level;
            int crossed[4];
            int count = 0;
            for (int e = 0; e < 4; ++e)
                if (above[e] != above[(e + 1) % 4]) crossed[count++] = e;
            if (count == 2) {
                segments.push_back({i, j, crossed[0], crossed[1]});
            } else if (count == 4) {
                const bool centre_above = (c[0] + c[1] + c[2] + c[3]) / 4.0 >= level;
                if (centre_above == above[0]) {
                    // corners 0 and 2 joined through the centre: cut off corners 1 and 3
                    segments.push_back({i, j, 0, 1});
                    segments.push_back({i, j, 2, 3});
                } else {
                    segments.push_back({i, j, 3, 0});
                    segments.push_back({i, j, 1, 2});
                }
            }
        }

    std::map<EdgeKey, std::vector<std::size_t>> by_edge;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        by_edge[edge_key(segments[s].ci, segments[s].cj, segments[s].edge_a, n)].push_back(s);
        by_edge[edge_key(segments[s].ci, segments[s].cj, segments[s].edge_b, n)].push_back(s);
    }

    auto crossing = [&](long ui, long uj, int local) -> std::array<double, 2> {
        long ai = ui, aj = uj, bi = ui, bj = uj;
        switch (local) {
        case 0: bi = ui + 1; break;
        case 1: ai = bi = ui + 1; bj = uj + 1; break;
        case 2: aj = bj = uj + 1; bi = ui + 1; break;
        default: bj = uj + 1; break;
        }
        const double va = value(ai, aj), vb = value(bi, bj);
        const double t = (level - va) / (vb - va);
        const double x = static_cast<double>(ai) + t * static_cast<double>(bi - ai);
        const double y = static_cast<double>(aj) + t * static_cast<double>(bj - aj);
        return {x / n, y / n};
    };

    std::vector<ContourPolyline> out;
    std::vector<bool> used(segments.size(), false);
    for (std::size_t start = 0; start < segments.size(); ++start) {
        if (used[start]) continue;
        ContourPolyline line;
        line.band = band;
        long ui = segments[start].ci, uj = segments[start].cj;
        const int start_edge = segments[start].edge_a;
        line.vertices.push_back(crossing(ui, uj, start_edge));
        std::size_t cur = start;
        int exit_edge = segments[start].edge_b;
        for (;;) {
            used[cur] = true;
            line.vertices.push_back(crossing(ui, uj, exit_edge));
            const EdgeKey key = edge_key(segments[cur].ci, segments[cur].cj, exit_edge, n);
            ui += step_i[exit_edge];
            uj += step_j[exit_edge];
            const auto& owners = by_edge.at(key);
            if (owners.size() != 2) throw std::logic_error("isoline edge not shared by two segments");
            const std::size_t next = owners[0] == cur ? owners[1] : owners[0];
            if (next == start && segments[start].edge_a == (exit_edge + 2) % 4) break;
            // The entry edge in the neighbour is the opposite local edge.
            const int entry = (exit_edge + 2) % 4;
            const Segment& s = segments[next];
            exit_edge = s.edge_a == entry ? s.edge_b : s.edge_a;
            cur = next;
        }
        // Last vertex is the start crossing seen from the current frame.
        const long di = ui - segments[start].ci;
        const long dj = uj - segments[start].cj;
        line.winding = {di / n, dj / n};
        line.closed = di == 0 && dj == 0;
        out.push_back(std::move(line));
    }
    return out;
}

} // namespace bloch
