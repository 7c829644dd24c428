// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "setanon/core.hpp"
#include "setanon/flip.hpp"
#include "setanon/greedy.hpp"
#include "setanon/hash.hpp"
#include "setanon/io.hpp"
#include "setanon/kgroup.hpp"
#include "setanon/minhash.hpp"
#include "setanon/oracle.hpp"
#include "setanon/parallel.hpp"
#include "setanon/pipeline.hpp"
#include "setanon/querylog.hpp"
#include "setanon/threader.hpp"
