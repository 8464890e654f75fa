#pragma once
#include "hlb/hlb.hpp"

namespace testutil {

inline hlb::scenarios::Built sec3(int N, hlb::kernels::KernelSpec k = hlb::kernels::KernelSpec::modified(0.1),
                                  double M = 1.0, double A = 1.0) {
    hlb::scenarios::ScenarioSpec s;
    s.domain = {1.0, N, hlb::grid::Mode::periodic};
    s.kernel = k;
    s.M = M;
    s.A_omega = A;
    return hlb::scenarios::build_sec3(s);
}

inline hlb::evolution::StepControl control(double t_max, double bkm_stop, double ux_factor = 0.05) {
    hlb::evolution::StepControl c;
    c.t_max = t_max;
    c.bkm_stop = bkm_stop;
    c.ux_factor = ux_factor;
    return c;
}

}  // namespace testutil
