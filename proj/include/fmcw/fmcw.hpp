#ifndef FMCW_FMCW_HPP
#define FMCW_FMCW_HPP

#include "fmcw/core.hpp"
#include "fmcw/config.hpp"
#include "fmcw/fft.hpp"
#include "fmcw/scene.hpp"
#include "fmcw/simulate.hpp"
#include "fmcw/dsp.hpp"
#include "fmcw/doa.hpp"
#include "fmcw/detect.hpp"
#include "fmcw/classify.hpp"
#include "fmcw/eval.hpp"
#include "fmcw/io.hpp"
#include "fmcw/pipeline.hpp"

#endif  // FMCW_FMCW_HPP
