#pragma once

#include "poncelet/confrac.hpp"
#include "poncelet/errors.hpp"
#include "poncelet/family.hpp"
#include "poncelet/geometry.hpp"
#include "poncelet/rotation.hpp"
#include "poncelet/twist_family.hpp"
