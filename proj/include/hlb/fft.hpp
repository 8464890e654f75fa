#pragma once
// Thin FFTW3 wrapper: cached real<->complex plans, one per length.
#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace hlb::fft {

using cplx = std::complex<double>;

class Plan {
public:
    explicit Plan(int n) : n_(n) {
        double* r = fftw_alloc_real(n);
        fftw_complex* c = fftw_alloc_complex(n / 2 + 1);
        fwd_ = fftw_plan_dft_r2c_1d(n, r, c, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_1d(n, c, r, FFTW_ESTIMATE);
        fftw_free(r);
        fftw_free(c);
    }
    ~Plan() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;

    int size() const { return n_; }

    // out has n/2+1 entries, unnormalized.
    void forward(const double* in, cplx* out) const {
        Buffers& b = buffers();
        std::copy(in, in + n_, b.r);
        fftw_execute_dft_r2c(fwd_, b.r, b.c);
        auto* cc = reinterpret_cast<cplx*>(b.c);
        std::copy(cc, cc + n_ / 2 + 1, out);
    }

    // Inverse without the 1/n factor.
    void backward(const cplx* in, double* out) const {
        Buffers& b = buffers();
        auto* cc = reinterpret_cast<cplx*>(b.c);
        std::copy(in, in + n_ / 2 + 1, cc);
        fftw_execute_dft_c2r(bwd_, b.c, b.r);
        std::copy(b.r, b.r + n_, out);
    }

private:
    struct Buffers {
        double* r = nullptr;
        fftw_complex* c = nullptr;
        explicit Buffers(int n) : r(fftw_alloc_real(n)), c(fftw_alloc_complex(n / 2 + 1)) {}
        ~Buffers() {
            fftw_free(r);
            fftw_free(c);
        }
    };
    // c2r destroys its input, so each thread works on private aligned copies.
    Buffers& buffers() const {
        thread_local std::map<int, std::unique_ptr<Buffers>> pool;
        auto& slot = pool[n_];
        if (!slot) slot = std::make_unique<Buffers>(n_);
        return *slot;
    }

    int n_;
    fftw_plan fwd_;
    fftw_plan bwd_;
};

inline const Plan& plan(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<Plan>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& p = cache[n];
    if (!p) p = std::make_unique<Plan>(n);
    return *p;
}

inline std::vector<cplx> rfft(const std::vector<double>& v) {
    std::vector<cplx> out(v.size() / 2 + 1);
    plan(static_cast<int>(v.size())).forward(v.data(), out.data());
    return out;
}

// Normalized inverse.
inline std::vector<double> irfft(const std::vector<cplx>& c, int n) {
    std::vector<double> out(n);
    plan(n).backward(c.data(), out.data());
    for (double& x : out) x /= n;
    return out;
}

// Multiply mode k (0..n/2) by m(k) and transform back.
template <class Mult>
std::vector<double> apply_multiplier(const std::vector<double>& v, Mult&& m) {
    int n = static_cast<int>(v.size());
    auto c = rfft(v);
    for (int k = 0; k <= n / 2; ++k) c[k] *= m(k);
    return irfft(c, n);
}

}  // namespace hlb::fft
