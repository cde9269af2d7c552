// uvbake.hpp — umbrella header.
#pragma once

#include "uvbake/baker.hpp"
#include "uvbake/camera.hpp"
#include "uvbake/compose.hpp"
#include "uvbake/image.hpp"
#include "uvbake/mesh.hpp"
#include "uvbake/metrics.hpp"
#include "uvbake/obj_io.hpp"
#include "uvbake/pipeline.hpp"
#include "uvbake/png_io.hpp"
#include "uvbake/prompt.hpp"
#include "uvbake/vec.hpp"
#include "uvbake/visibility.hpp"
