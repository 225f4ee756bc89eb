#ifndef IQC_IQC_HPP
#define IQC_IQC_HPP

#include "iqc/error.hpp"
#include "iqc/json_io.hpp"
#include "iqc/lmi_builder.hpp"
#include "iqc/lti.hpp"
#include "iqc/multiplier.hpp"
#include "iqc/netexample.hpp"
#include "iqc/plant.hpp"
#include "iqc/sdp.hpp"
#include "iqc/sdp_solver.hpp"
#include "iqc/sdpa_io.hpp"
#include "iqc/value_set.hpp"
#include "iqc/verify.hpp"

#endif  // IQC_IQC_HPP
