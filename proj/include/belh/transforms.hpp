#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "belh/grid.hpp"

namespace belh {

/// Allocator backed by fftw_malloc so every buffer shares the SIMD alignment
/// the plans were created with (required for new-array execution).
template <class T>
struct FftwAllocator {
    using value_type = T;
    FftwAllocator() = default;
    template <class U>
    FftwAllocator(const FftwAllocator<U>&) {}
    T* allocate(std::size_t count) {
        void* p = fftw_malloc(count * sizeof(T));
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) { fftw_free(p); }
    template <class U>
    bool operator==(const FftwAllocator<U>&) const { return true; }
};

using RealVec = std::vector<double, FftwAllocator<double>>;
using CplxVec = std::vector<std::complex<double>, FftwAllocator<std::complex<double>>>;

namespace detail {
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Real-to-complex 3-D transform engine for one grid. Forward output is
// normalized by 1/n^3, so the zero mode equals the field mean and
// inverse(forward(x)) == x up to rounding. Plans use FFTW_ESTIMATE, which is
// deterministic run to run. One engine per run; execution on distinct
// buffers is thread-safe, plan creation is serialized globally.
// ---------------------------------------------------------------------------
class Fft {
public:
    explicit Fft(const Grid& grid) : grid_(grid) {
        rbuf_.resize(grid_.npts());
        cbuf_.resize(grid_.nspec());
        std::lock_guard<std::mutex> lock(detail::planner_mutex());
        fwd_ = fftw_plan_dft_r2c_3d(grid_.n, grid_.n, grid_.n, rbuf_.data(),
                                    reinterpret_cast<fftw_complex*>(cbuf_.data()),
                                    FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
        bwd_ = fftw_plan_dft_c2r_3d(grid_.n, grid_.n, grid_.n,
                                    reinterpret_cast<fftw_complex*>(cbuf_.data()),
                                    rbuf_.data(), FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw std::runtime_error("Fft: plan creation failed");
    }

    ~Fft() {
        std::lock_guard<std::mutex> lock(detail::planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    const Grid& grid() const { return grid_; }

    void forward(const RealVec& phys, CplxVec& spec) const {
        check_sizes(phys.size(), spec.size());
        fftw_execute_dft_r2c(fwd_, const_cast<double*>(phys.data()),
                             reinterpret_cast<fftw_complex*>(spec.data()));
        const double scale = 1.0 / double(grid_.npts());
        for (auto& v : spec) v *= scale;
    }

    /// c2r destroys its input, so the spectral data is staged through a
    /// per-engine scratch buffer.
    void inverse(const CplxVec& spec, RealVec& phys) const {
        check_sizes(phys.size(), spec.size());
        std::memcpy(cbuf_.data(), spec.data(), spec.size() * sizeof(std::complex<double>));
        fftw_execute_dft_c2r(bwd_, reinterpret_cast<fftw_complex*>(cbuf_.data()), phys.data());
    }

    CplxVec forward(const RealVec& phys) const {
        CplxVec spec(grid_.nspec());
        forward(phys, spec);
        return spec;
    }
    RealVec inverse(const CplxVec& spec) const {
        RealVec phys(grid_.npts());
        inverse(spec, phys);
        return phys;
    }

private:
    void check_sizes(std::size_t np, std::size_t ns) const {
        if (np != grid_.npts() || ns != grid_.nspec())
            throw std::invalid_argument("Fft: field size does not match grid");
    }

    Grid grid_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
    mutable RealVec rbuf_;
    mutable CplxVec cbuf_;
};

}  // namespace belh
