#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "belh/field.hpp"
#include "belh/grid.hpp"
#include "belh/tensor_algebra.hpp"

namespace belh {

// ---------------------------------------------------------------------------
// Checkpoint file layout (little-endian):
//   magic "BELH" | u32 version | u32 nx,ny,nz | f64 box_radius
//   | BulkParams as 8 f64 (L, mu, gamma, a, b, c, xi, eps) | f64 time
//   | 5 Q coefficient fields | 3 velocity fields
// Field arrays are f64 in row-major (x slowest, z fastest) physical view.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointHeader {
    Grid grid;
    BulkParams params;
    double time = 0.0;
};

namespace detail {
template <class T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
void read_pod(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace detail

inline void write_checkpoint(const std::string& path, const FieldSet& state,
                             const BulkParams& params) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
    os.write("BELH", 4);
    detail::write_pod(os, kCheckpointVersion);
    const std::uint32_t n = static_cast<std::uint32_t>(state.grid.n);
    detail::write_pod(os, n);
    detail::write_pod(os, n);
    detail::write_pod(os, n);
    detail::write_pod(os, state.grid.box_radius);
    for (double v : {params.L, params.mu, params.gamma, params.a, params.b, params.c,
                     params.xi, params.eps})
        detail::write_pod(os, v);
    detail::write_pod(os, state.time);
    for (const auto& f : state.q)
        os.write(reinterpret_cast<const char*>(f.phys.data()),
                 std::streamsize(f.phys.size() * sizeof(double)));
    for (const auto& f : state.u)
        os.write(reinterpret_cast<const char*>(f.phys.data()),
                 std::streamsize(f.phys.size() * sizeof(double)));
    if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

inline CheckpointHeader read_checkpoint_header(std::istream& is, const std::string& path) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "BELH", 4) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    std::uint32_t version = 0;
    detail::read_pod(is, version);
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version in " + path);
    std::uint32_t nx, ny, nz;
    detail::read_pod(is, nx);
    detail::read_pod(is, ny);
    detail::read_pod(is, nz);
    if (nx != ny || ny != nz)
        throw std::runtime_error("checkpoint: non-cubic grid in " + path);
    double box_radius;
    detail::read_pod(is, box_radius);
    CheckpointHeader h;
    h.grid = Grid(int(nx), box_radius);
    detail::read_pod(is, h.params.L);
    detail::read_pod(is, h.params.mu);
    detail::read_pod(is, h.params.gamma);
    detail::read_pod(is, h.params.a);
    detail::read_pod(is, h.params.b);
    detail::read_pod(is, h.params.c);
    detail::read_pod(is, h.params.xi);
    detail::read_pod(is, h.params.eps);
    detail::read_pod(is, h.time);
    if (!is) throw std::runtime_error("checkpoint: truncated header in " + path);
    return h;
}

inline FieldSet read_checkpoint(const std::string& path, CheckpointHeader* header_out = nullptr) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    CheckpointHeader h = read_checkpoint_header(is, path);
    FieldSet state(h.grid);
    state.time = h.time;
    auto read_field = [&](DualField& f) {
        is.read(reinterpret_cast<char*>(f.phys.data()),
                std::streamsize(f.phys.size() * sizeof(double)));
        f.mark_phys();
    };
    for (auto& f : state.q) read_field(f);
    for (auto& f : state.u) read_field(f);
    if (!is) throw std::runtime_error("checkpoint: truncated data in " + path);
    if (header_out) *header_out = h;
    return state;
}

}  // namespace belh
