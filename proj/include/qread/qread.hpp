#pragma once

#include "qread/analytic_snr.hpp"
#include "qread/common.hpp"
#include "qread/csv.hpp"
#include "qread/info_metrics.hpp"
#include "qread/measurement_models.hpp"
#include "qread/readout.hpp"
#include "qread/rng.hpp"
#include "qread/sme.hpp"
#include "qread/state_algebra.hpp"
#include "qread/trajectory.hpp"
#include "qread/transfer_matrix.hpp"
