#pragma once

#include "cgnn/core.hpp"
#include "cgnn/graph.hpp"
#include "cgnn/spectral.hpp"
#include "cgnn/ode.hpp"
#include "cgnn/dynamics.hpp"
#include "cgnn/closed_form.hpp"
#include "cgnn/datasets.hpp"
#include "cgnn/model.hpp"
#include "cgnn/checkpoint.hpp"
#include "cgnn/config.hpp"
#include "cgnn/verify.hpp"
#include "cgnn/experiments.hpp"
