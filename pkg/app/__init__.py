# Trispec application package
