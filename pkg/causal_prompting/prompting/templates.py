KNOWLEDGE_TEMPLATE = (
    "We want to carry out causal inference on {theme}, considering {variables} as variables.\n"
    "First, we have conducted the statistical causal discovery with {algorithm}, "
    "using a fully standardized dataset on {dataset}.\n"
    "\n"
    "{blank5}\n"
    "\n"
    "According to the results shown above, it has been determined that there may be "
    "{blank6} direct impact of a change in {cause} on {effect}{blank9}.\n"
    "Then, your task is to interpret this result from a domain knowledge perspective "
    "and determine whether this statistically suggested hypothesis is plausible "
    "in the context of the domain.\n"
    "\n"
    "Please provide an explanation that leverages your expert knowledge on the causal "
    "relationship between {cause} and {effect}, "
    "and assess the naturalness of this causal discovery result.\n"
    "Your response should consider the relevant factors and provide a reasoned "
    "explanation based on your understanding of the domain."
)
"""Knowledge-generation prompt for Patterns 1-4 with Exact Search or DirectLiNGAM."""

PC_KNOWLEDGE_TEMPLATE = (
    "We want to carry out causal inference on {theme}, considering {variables} as variables.\n"
    "First, we have conducted the statistical causal discovery with the PC (Peter-Clerk) "
    "algorithm, using a fully standardized dataset on {dataset}.\n"
    "\n"
    "{blank5}\n"
    "\n"
    "According to the results shown above, it has been determined that\n"
    "{blank6}.\n"
    "Then, your task is to interpret this result from a domain knowledge perspective "
    "and determine whether this statistically suggested hypothesis is plausible "
    "in the context of the domain.\n"
    "\n"
    "Please provide an explanation that leverages your expert knowledge on the causal "
    "relationship between {cause} and {effect}, "
    "and assess the naturalness of this causal discovery result.\n"
    "Your response should consider the relevant factors and provide a reasoned "
    "explanation based on your understanding of the domain."
)
"""Knowledge-generation prompt for Patterns 1-2 with PC, which can output undirected edges."""

PATTERN0_KNOWLEDGE_TEMPLATE = (
    "We want to carry out causal inference on {theme}, considering {variables} as variables.\n"
    "\n"
    "If {cause} is modified, will it have a direct impact on {effect}?\n"
    "\n"
    "Please provide an explanation that leverages your expert knowledge on the causal "
    "relationship between {cause} and {effect}.\n"
    "Your response should consider the relevant factors and provide a reasoned "
    "explanation based on your understanding of the domain."
)
"""Knowledge-generation prompt without any discovery output, for every method."""

INTEGRATION_TEMPLATE = (
    "An expert was asked the question below:\n"
    "{q1}\n"
    "\n"
    "Then, the expert replied with its domain knowledge:\n"
    "{answer}\n"
    "\n"
    "Considering objectively this discussion above, if {cause} is modified, "
    "will it have a direct or indirect impact on {effect}?\n"
    "Please answer this question with <yes> or <no>.\n"
    "No answers except these two responses are needed."
)
"""Knowledge-integration prompt asking for a single yes/no token."""

DIRECTED_HEADERS = {
    "P1": "All of the edges suggested by the statistical causal discovery are below:",
    "P2": (
        "All of the edges with non-zero bootstrap probabilities\n"
        "suggested by the statistical causal discovery are below:"
    ),
    "P3": (
        "All of the edges and their coefficients of the structural causal model\n"
        "suggested by the statistical causal discovery are below:"
    ),
    "P4": (
        "All of the edges with non-zero bootstrap probabilities\n"
        "and their coefficients of the structural causal model\n"
        "suggested by the statistical causal discovery are below:"
    ),
}
"""Header of the directed edge list, per pattern."""

UNDIRECTED_HEADER = (
    "In addition to the directed edges above, all of the undirected edges\n"
    "suggested by the statistical causal discovery are below:"
)

DIRECTED_ARROW = "→"
UNDIRECTED_SEPARATOR = "---"

PC_DIRECTED_SENTENCE = "there may be a direct impact of a change in {cause} on {effect}"
PC_UNDIRECTED_SENTENCE = (
    "there may be a causal relationship between {cause} and {effect}{probability}, "
    "although its direction could not be determined"
)
PC_ABSENT_SENTENCE = "there may be no direct impact of a change in {cause} on {effect}"
