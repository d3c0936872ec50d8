"""Hypothesis strategies for formulas."""

from hypothesis import strategies as st

from ilp.syntax import BOT, TOP, And, Box, Imp, Neg, Or, Rhd, Var


def formulas(variables=("p", "q"), max_leaves=8, rhd=True, box=True):
    leaves = st.sampled_from([Var(v) for v in variables] + [BOT, TOP])

    def extend(children):
        ops = [
            children.map(Neg),
            st.tuples(children, children).map(lambda t: And(*t)),
            st.tuples(children, children).map(lambda t: Or(*t)),
            st.tuples(children, children).map(lambda t: Imp(*t)),
        ]
        if box:
            ops.append(children.map(Box))
        if rhd:
            ops.append(st.tuples(children, children).map(lambda t: Rhd(*t)))
        return st.one_of(*ops)

    return st.recursive(leaves, extend, max_leaves=max_leaves)
