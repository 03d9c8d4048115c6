from collections.abc import Iterator

import numpy as np

from causal_prompting.core.graph import Method
from causal_prompting.prompting.prompt_context import Pattern, PromptContext
from causal_prompting.prompting.prompting_exceptions import (
    MissingContextError,
    UnsupportedPatternError,
)
from causal_prompting.prompting.templates import (
    DIRECTED_ARROW,
    DIRECTED_HEADERS,
    INTEGRATION_TEMPLATE,
    KNOWLEDGE_TEMPLATE,
    PATTERN0_KNOWLEDGE_TEMPLATE,
    PC_ABSENT_SENTENCE,
    PC_DIRECTED_SENTENCE,
    PC_KNOWLEDGE_TEMPLATE,
    PC_UNDIRECTED_SENTENCE,
    UNDIRECTED_HEADER,
    UNDIRECTED_SEPARATOR,
)
from causal_prompting.scd.bootstrap import undirected_pairs

_PROBABILITY_DECIMALS = 3
_COEFFICIENT_DECIMALS = 2


def _format_number(value: float, decimals: int) -> str:
    text = f"{value:.{decimals}f}".rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


def format_probability(value: float) -> str:
    """
    Renders a bootstrap probability with up to 3 decimals, trailing zeros removed.

    :param value: Probability.
    :return: Text such as "0.85" or "1".
    """
    return _format_number(value, _PROBABILITY_DECIMALS)


def format_coefficient(value: float) -> str:
    """
    Renders a causal coefficient with up to 2 decimals, trailing zeros removed.

    :param value: Coefficient.
    :return: Text such as "-0.43" or "0".
    """
    return _format_number(value, _COEFFICIENT_DECIMALS)


def ordered_pairs(size: int) -> Iterator[tuple[int, int]]:
    """
    Yields every ordered pair (effect i, cause j) with i != j, i outer and j inner.

    :param size: Number of variables.
    :return: Iterator over (i, j).
    """
    for effect in range(size):
        for cause in range(size):
            if effect != cause:
                yield effect, cause


def _check_context(ctx: PromptContext) -> None:
    if ctx.pattern == Pattern.P0:
        return
    if ctx.pattern.uses_coefficients and ctx.method != Method.DIRECT_LINGAM:
        raise UnsupportedPatternError(ctx.pattern.value, ctx.method.display_name)
    if ctx.scd_graph is None:
        raise MissingContextError(ctx.pattern.value, "the discovery result")
    if ctx.scd_graph.variable_names != ctx.variable_names:
        raise ValueError("The discovery result does not cover the prompt variables.")
    if ctx.pattern.uses_coefficients and ctx.scd_graph.coefficients is None:
        raise MissingContextError(ctx.pattern.value, "causal coefficients")
    if ctx.pattern.uses_bootstrap:
        if ctx.bootstrap is None:
            raise MissingContextError(ctx.pattern.value, "bootstrap probabilities")
        if ctx.bootstrap.variable_names != ctx.variable_names:
            raise ValueError("The bootstrap summary does not cover the prompt variables.")


def _directed_lines(ctx: PromptContext) -> list[str]:
    names = ctx.variable_names
    graph = ctx.scd_graph
    lines = []
    match ctx.pattern:
        case Pattern.P1:
            for cause, effect in graph.edges():
                lines.append(f"{names[cause]} {DIRECTED_ARROW} {names[effect]}")
        case Pattern.P2:
            for effect, cause in zip(*np.nonzero(ctx.bootstrap.directed_prob)):
                probability = format_probability(ctx.bootstrap.directed_prob[effect, cause])
                lines.append(
                    f"{names[cause]} {DIRECTED_ARROW} {names[effect]} "
                    f"(bootstrap probability = {probability})"
                )
        case Pattern.P3:
            for cause, effect in graph.edges():
                coefficient = format_coefficient(graph.coefficients[effect, cause])
                lines.append(
                    f"{names[cause]} {DIRECTED_ARROW} {names[effect]} "
                    f"(coefficient = {coefficient})"
                )
        case Pattern.P4:
            for effect, cause in zip(*np.nonzero(ctx.bootstrap.directed_prob)):
                probability = format_probability(ctx.bootstrap.directed_prob[effect, cause])
                coefficient = format_coefficient(graph.coefficients[effect, cause])
                lines.append(
                    f"{names[cause]} {DIRECTED_ARROW} {names[effect]} "
                    f"(coefficient = {coefficient}, bootstrap probability = {probability})"
                )
    return lines


def _undirected_lines(ctx: PromptContext) -> list[str]:
    names = ctx.variable_names
    if ctx.pattern == Pattern.P2:
        return [
            f"{names[i]} {UNDIRECTED_SEPARATOR} {names[j]} "
            f"(bootstrap probability = {format_probability(ctx.bootstrap.undirected_prob[i, j])})"
            for i, j in undirected_pairs(ctx.bootstrap)
        ]
    return [
        f"{names[i]} {UNDIRECTED_SEPARATOR} {names[j]}"
        for i, j in ctx.scd_graph.undirected_edges()
    ]


def _pc_sentence(ctx: PromptContext) -> str:
    i, j = ctx.effect, ctx.cause
    names = {"cause": ctx.cause_name, "effect": ctx.effect_name}
    if ctx.pattern == Pattern.P2:
        directed = ctx.bootstrap.directed_prob[i, j]
        undirected = ctx.bootstrap.undirected_prob[i, j]
        if directed > 0:
            return (
                PC_DIRECTED_SENTENCE.format(**names)
                + f" with a bootstrap probability of {format_probability(directed)}"
            )
        if undirected > 0:
            return PC_UNDIRECTED_SENTENCE.format(
                **names,
                probability=f" with a bootstrap probability of {format_probability(undirected)}",
            )
        return PC_ABSENT_SENTENCE.format(**names)

    if ctx.scd_graph.has_edge(i, j):
        return PC_DIRECTED_SENTENCE.format(**names)
    if (min(i, j), max(i, j)) in ctx.scd_graph.undirected:
        return PC_UNDIRECTED_SENTENCE.format(**names, probability="")
    return PC_ABSENT_SENTENCE.format(**names)


def _blank6_and_9(ctx: PromptContext) -> tuple[str, str]:
    i, j = ctx.effect, ctx.cause
    graph = ctx.scd_graph
    match ctx.pattern:
        case Pattern.P1:
            return ("a", "") if graph.has_edge(i, j) else ("no", "")
        case Pattern.P2:
            probability = ctx.bootstrap.directed_prob[i, j]
            if probability == 0:
                return "no", ""
            return "a", f"with a bootstrap probability of {format_probability(probability)}"
        case Pattern.P3:
            coefficient = graph.coefficients[i, j]
            if coefficient == 0:
                return "no", ""
            return "a", f"with a causal coefficient of {format_coefficient(coefficient)}"
        case Pattern.P4:
            probability = ctx.bootstrap.directed_prob[i, j]
            coefficient = graph.coefficients[i, j]
            if probability == 0:
                return "no", ""
            if coefficient == 0:
                return "a", (
                    f"with a bootstrap probability of {format_probability(probability)}, "
                    "but the coefficient is likely to be 0"
                )
            return "a", (
                f"with a bootstrap probability of {format_probability(probability)}, "
                f"and the coefficient is likely to be {format_coefficient(coefficient)}"
            )
    return "", ""


def render_edge_context(ctx: PromptContext) -> tuple[str, str, str]:
    """
    Renders the parts of the knowledge-generation prompt that carry the
    discovery output: the edge listing, the a/no word (or the full PC
    sentence) and the value clause.

    :param ctx: Prompt context.
    :return: (blank5, blank6, blank9); all empty for Pattern 0.
    :raises UnsupportedPatternError: If the pattern needs coefficients the method lacks.
    :raises MissingContextError: If the graph or the bootstrap summary is missing.
    """
    _check_context(ctx)
    if ctx.pattern == Pattern.P0:
        return "", "", ""

    blank5_lines = [DIRECTED_HEADERS[ctx.pattern.value], *_directed_lines(ctx)]
    if ctx.method == Method.PC:
        blank5_lines += [UNDIRECTED_HEADER, *_undirected_lines(ctx)]
        return "\n".join(blank5_lines), _pc_sentence(ctx), ""

    blank6, blank9 = _blank6_and_9(ctx)
    return "\n".join(blank5_lines), blank6, blank9


def build_knowledge_prompt(ctx: PromptContext) -> str:
    """
    Renders the knowledge-generation prompt q1 of one ordered pair.

    :param ctx: Prompt context.
    :return: Prompt text.
    :raises UnsupportedPatternError: If the pattern needs coefficients the method lacks.
    :raises MissingContextError: If the graph or the bootstrap summary is missing.
    """
    if ctx.pattern == Pattern.P0:
        return PATTERN0_KNOWLEDGE_TEMPLATE.format(
            theme=ctx.theme,
            variables=ctx.variable_descriptions,
            cause=ctx.cause_name,
            effect=ctx.effect_name,
        )

    blank5, blank6, blank9 = render_edge_context(ctx)
    if ctx.method == Method.PC:
        return PC_KNOWLEDGE_TEMPLATE.format(
            theme=ctx.theme,
            variables=ctx.variable_descriptions,
            dataset=ctx.dataset_description,
            blank5=blank5,
            blank6=blank6,
            cause=ctx.cause_name,
            effect=ctx.effect_name,
        )
    return KNOWLEDGE_TEMPLATE.format(
        theme=ctx.theme,
        variables=ctx.variable_descriptions,
        algorithm=ctx.algorithm,
        dataset=ctx.dataset_description,
        blank5=blank5,
        blank6=blank6,
        blank9=f" {blank9}" if blank9 else "",
        cause=ctx.cause_name,
        effect=ctx.effect_name,
    )


def build_integration_prompt(q1: str, answer: str, cause_name: str, effect_name: str) -> str:
    """
    Renders the knowledge-integration prompt q2 that asks for a yes/no answer.

    :param q1: Knowledge-generation prompt.
    :param answer: Reply to q1.
    :param cause_name: Name of x_j.
    :param effect_name: Name of x_i.
    :return: Prompt text.
    """
    return INTEGRATION_TEMPLATE.format(
        q1=q1, answer=answer, cause=cause_name, effect=effect_name
    )
