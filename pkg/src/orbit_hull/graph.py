from langgraph.graph import StateGraph, END
from .state import MembershipState
from .nodes import (
    decompose_node,
    majorize_node,
    synthesize_node,
    verify_node,
    certify_node,
)
from .logger import get_logger

# Get the logger
logger = get_logger()


def state_has_error(state: MembershipState) -> bool:
    return bool(state.get("errors", []))


def should_continue_after_decompose(state: MembershipState) -> str:
    if state_has_error(state):
        logger.info("--- [decompose] Error detected ---")
        return "end_step"
    return "next_step"


def route_after_majorize(state: MembershipState) -> str:
    if state_has_error(state):
        logger.info("--- [majorize] Error detected ---")
        return "end_step"
    if state["certificate"].verdict == "feasible":
        logger.info("--- [majorize] Feasible, synthesizing witness ---")
        return "member_step"
    logger.info("--- [majorize] Infeasible, certifying ---")
    return "non_member_step"


def should_continue_after_synthesize(state: MembershipState) -> str:
    if state_has_error(state):
        logger.info("--- [synthesize] Error detected ---")
        return "end_step"
    return "next_step"


# Create the StateGraph
workflow = StateGraph(MembershipState)

# Add the nodes to the graph
workflow.add_node("decompose", decompose_node)
workflow.add_node("majorize", majorize_node)
workflow.add_node("synthesize", synthesize_node)
workflow.add_node("verify", verify_node)
workflow.add_node("certify", certify_node)

# Set the entry point of the graph
workflow.set_entry_point("decompose")

# Add the edges connecting the nodes
workflow.add_conditional_edges(
    "decompose",
    should_continue_after_decompose,
    {
        "next_step": "majorize",
        "end_step": END,
    },
)

# Feasible instances get a witness, infeasible ones a certificate
workflow.add_conditional_edges(
    "majorize",
    route_after_majorize,
    {
        "member_step": "synthesize",
        "non_member_step": "certify",
        "end_step": END,
    },
)

workflow.add_conditional_edges(
    "synthesize",
    should_continue_after_synthesize,
    {
        "next_step": "verify",
        "end_step": END,
    },
)

workflow.add_edge("verify", END)
workflow.add_edge("certify", END)

# Compile the graph into a runnable application
app = workflow.compile()
