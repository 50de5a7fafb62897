package toy.shapes;

/** A circle defined by its radius. */
public class Circle extends Shape {

    private final double radius;

    public Circle(double radius) {
        this.radius = radius;
    }

    /**
     * Computes the exact area of the circle shape using its radius.
     */
    @Override
    public double area() {
        double exact = Math.PI * radius * radius;
        return exact;
    }

    /**
     * Returns the perimeter of the circle shape from its circumference.
     */
    @Override
    public double perimeter() {
        double circumference = 2.0 * Math.PI * radius;
        return circumference;
    }

    /** Builds a short description of the round circle shape. */
    @Override
    public String describe() {
        String roundLabel = "r=" + radius;
        return roundLabel;
    }
}
