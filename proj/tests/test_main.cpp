// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
