# Connector tests package
