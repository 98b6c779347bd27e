#pragma once

#include "wtb/error.hpp"
#include "wtb/rng.hpp"
#include "wtb/history.hpp"
#include "wtb/loss_function.hpp"
#include "wtb/instance.hpp"
#include "wtb/reo.hpp"
#include "wtb/environment.hpp"
#include "wtb/instance_json.hpp"
#include "wtb/oracle.hpp"
#include "wtb/instances.hpp"
#include "wtb/algorithms/schedule.hpp"
#include "wtb/algorithms/successive_elimination.hpp"
#include "wtb/algorithms/exp3.hpp"
#include "wtb/algorithms/epoch_ucb.hpp"
#include "wtb/f1fit.hpp"
#include "wtb/harness.hpp"
