# Services package
from app.services.ctrig_service import ctrig_service
from app.services.potential_service import potential_service
from app.services.forward_service import forward_service
from app.services.resolvent_service import resolvent_service
from app.services.oracle_service import oracle_service
from app.services.inverse_service import inverse_service

__all__ = [
    "ctrig_service",
    "potential_service",
    "forward_service",
    "resolvent_service",
    "oracle_service",
    "inverse_service",
]
