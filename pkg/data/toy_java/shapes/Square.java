package toy.shapes;

/** An axis aligned square. */
public class Square extends Shape {

    private final double side;

    public Square(double side) {
        this.side = side;
    }

    /** Computes the area of the square shape from its side length. */
    @Override
    public double area() {
        double length = side;
        return length * length;
    }

    /** Returns the perimeter of the square shape. */
    @Override
    public double perimeter() {
        return 4.0 * side;
    }

    /**
     * Builds a short description of the square shape as its label.
     */
    @Override
    public String describe() {
        int corners = 4;
        return "square with " + corners + " corners";
    }

    @Override
    public void scale(double factor) {
        // a fresh side would be needed; the toy square stays rigid
    }
}
