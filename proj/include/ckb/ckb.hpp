#pragma once

#include <ckb/error.hpp>
#include <ckb/types.hpp>
#include <ckb/rng.hpp>
#include <ckb/kernels.hpp>
#include <ckb/linalg.hpp>
#include <ckb/discrepancy.hpp>
#include <ckb/oracle.hpp>
#include <ckb/datagen.hpp>
#include <ckb/csv.hpp>
#include <ckb/alignment.hpp>
#include <ckb/report.hpp>
