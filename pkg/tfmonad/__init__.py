# TanMonad package
