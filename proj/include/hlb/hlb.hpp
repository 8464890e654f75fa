#pragma once
#include "hlb/errors.hpp"
#include "hlb/parallel.hpp"
#include "hlb/fft.hpp"
#include "hlb/grid.hpp"
#include "hlb/kernels.hpp"
#include "hlb/biot_savart.hpp"
#include "hlb/evolution.hpp"
#include "hlb/flow_map.hpp"
#include "hlb/diagnostics.hpp"
#include "hlb/lemma_lab.hpp"
#include "hlb/scenarios.hpp"
#include "hlb/runner.hpp"
