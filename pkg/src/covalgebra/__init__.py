"""covalgebra: Galois covers of Laurent tori and the D-module structure of their pushforwards."""

__version__ = "0.1.0"
