"""dslkit: ad-hoc polymorphic delimited continuations for Python.

Keyword values (Yield, Await, Get, Put, Each, Fork, Return, Shift, Continue)
get their meaning from the domain a computation runs in: a registry maps
(keyword kind, domain descriptor) to an interpretation, deriving instances
for function, error and trampoline layers it has no direct entry for.  On
top of that sit a stack-safe asynchronous task runtime and a name-based CPS
transformer for a small direct-style scripting language.
"""

from .core import (DepthLimitError, DslError, InstanceRegistry,
                   Interpretation, KeywordValue, ProtocolViolation,
                   RegistrationError, ResolutionError, ResolutionTrace,
                   cps_apply)
from .deferred import BlockingTimeout, Deferred, DeferredError
from .derivation import (DEFAULT_RULES, derive_error_domain,
                         derive_function_domain, derive_trampoline_domain,
                         rule_error, rule_function, rule_trampoline)
from .descriptors import (ANY, BOOLEAN, DOUBLE, HINT, INT, STRING, UNIT,
                          AnyType, Collection, Cont, DeferredType, Descriptor,
                          ErrorLayer, Fn, HintType, PVar, Scalar, Stream,
                          TrampolineType, UnitType, canonicalize, matches,
                          parse_descriptor, sniff, task_domain)
from .keywords import (CONTINUE, Await, Continue, Each, Get, OrderedSet, Put,
                       Return, Shift, Yield, set_blocking_tail_timeout)
from .lazystream import EMPTY, Cons, Empty, LazyStream, from_list
from .registry import default_registry
from .task import (AsyncChannel, ByteBuffer, ChannelClosed,
                   DeterministicScheduler, Fork, PoolScheduler, blocking_await,
                   channel_read, channel_write, current_scheduler,
                   each_sequential, fork_join, task_bind, task_delay,
                   task_from_deferred, task_map, task_raise, task_unit,
                   try_protect, use_scheduler)
from .trampoline import (Done, More, StackProbe, frame_depth, run_trampoline,
                         set_stack_probe)

__version__ = "0.1.0"

__all__ = [
    "ANY", "BOOLEAN", "CONTINUE", "DEFAULT_RULES", "DOUBLE", "EMPTY", "HINT",
    "INT", "STRING", "UNIT", "AnyType", "AsyncChannel", "Await",
    "BlockingTimeout", "ByteBuffer", "ChannelClosed", "Collection", "Cons",
    "Cont", "Continue", "Deferred", "DeferredError", "DeferredType",
    "DepthLimitError", "Descriptor", "DeterministicScheduler", "Done",
    "DslError", "Each", "Empty", "ErrorLayer", "Fn", "Fork", "Get",
    "HintType", "InstanceRegistry", "Interpretation", "KeywordValue",
    "LazyStream", "More", "OrderedSet", "PVar", "PoolScheduler",
    "ProtocolViolation", "Put", "RegistrationError", "ResolutionError",
    "ResolutionTrace", "Return", "Scalar", "Shift", "StackProbe", "Stream",
    "TrampolineType", "UnitType", "Yield", "blocking_await", "canonicalize",
    "channel_read", "channel_write", "cps_apply", "current_scheduler",
    "default_registry", "derive_error_domain", "derive_function_domain",
    "derive_trampoline_domain", "each_sequential", "fork_join", "frame_depth",
    "from_list", "matches", "parse_descriptor", "rule_error", "rule_function",
    "rule_trampoline", "run_trampoline", "set_blocking_tail_timeout",
    "set_stack_probe", "sniff", "task_bind", "task_delay",
    "task_from_deferred", "task_domain", "task_map", "task_raise",
    "task_unit", "try_protect", "use_scheduler",
]
