// deform.hpp — umbrella header.
#pragma once

#include "deform/collision.hpp"
#include "deform/core.hpp"
#include "deform/interior.hpp"
#include "deform/material.hpp"
#include "deform/mesh.hpp"
#include "deform/network.hpp"
#include "deform/obj_io.hpp"
#include "deform/scenario.hpp"
#include "deform/solver.hpp"
