#pragma once

// Umbrella header: fields and exterior calculus, flow models, integration and
// splitting estimation, contact-geometric operations, verification reports,
// and the configuration-driven runner.

#include <anoflow/core.hpp>
#include <anoflow/fields.hpp>
#include <anoflow/models.hpp>
#include <anoflow/dynamics.hpp>
#include <anoflow/contact.hpp>
#include <anoflow/verify.hpp>
#include <anoflow/runner.hpp>
