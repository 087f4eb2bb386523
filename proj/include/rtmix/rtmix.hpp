#pragma once

#include "rtmix/assembly.hpp"
#include "rtmix/coefficients.hpp"
#include "rtmix/config.hpp"
#include "rtmix/eigensolver.hpp"
#include "rtmix/error.hpp"
#include "rtmix/extrapolation.hpp"
#include "rtmix/mesh.hpp"
#include "rtmix/quadrature.hpp"
#include "rtmix/report.hpp"
#include "rtmix/study.hpp"
#include "rtmix/superclose.hpp"
